import { beforeAll, describe, expect, it } from 'vitest';

import { Batch } from '../src/data';
import { computeLosses, lossNumbers } from '../src/losses';
import {
  DenoisingTeacher,
  MotionTeacher,
  Student,
  denoisingTeacherSpec,
  motionTeacherSpec,
  studentSpec,
} from '../src/models';
import { sumSquaredLoss } from '../src/ops';
import { initBackend, tf } from '../src/tfruntime';

const T = 4;
const SIDE = 12;

function randomBatch(batch = 2, seed = 7): Batch {
  const xQis = tf.randomUniform([batch, SIDE, SIDE, T], 0, 1, 'float32', seed);
  return {
    xTrue: tf.randomUniform([batch, SIDE, SIDE, 1], 0, 1, 'float32', seed + 1),
    xMotion: tf.randomUniform([batch, SIDE, SIDE, T], 0, 1, 'float32', seed + 2),
    xNoise: tf.randomUniform([batch, SIDE, SIDE, 1], 0, 1, 'float32', seed + 3),
    xQis,
    xQisMean: tf.mean(xQis, 3, true) as tf.Tensor4D,
  };
}

function makeModels(seed = 11) {
  const mSpec = motionTeacherSpec(T, 6, 3);
  const dSpec = denoisingTeacherSpec(6);
  const motion = new MotionTeacher(mSpec, seed);
  const denoising = new DenoisingTeacher(dSpec, seed + 1);
  const student = new Student(studentSpec(mSpec, dSpec, 3, 8), seed + 2);
  return { motion, denoising, student };
}

beforeAll(async () => {
  await initBackend();
});

describe('loss decomposition', () => {
  it('overall equals mse + lambda1*motion + lambda2*noise to 1e-9', () => {
    const { motion, denoising, student } = makeModels();
    const batch = randomBatch();
    for (const [l1, l2] of [[0.7, 0.3], [1.0, 1.0], [0.0, 2.0]]) {
      const values = computeLosses(batch, motion, denoising, student, l1, l2);
      // recombine the returned components with the same float32 ops
      const recombined = tf.add(
        values.mse,
        tf.add(tf.mul(values.motion, l1), tf.mul(values.noise, l2)),
      ).dataSync()[0];
      const residual = Math.abs(values.overall.dataSync()[0] - recombined);
      expect(residual).toBeLessThanOrEqual(1e-9);
      // float64 recombination agrees to float32 rounding
      const n = lossNumbers(values);
      const loose = Math.abs(n.overall - (n.mse + l1 * n.motion + l2 * n.noise));
      expect(loose).toBeLessThan(1e-5 * Math.max(1, n.overall));
    }
  });

  it('reduces to the reconstruction loss when both lambdas are zero', () => {
    const { motion, denoising, student } = makeModels(23);
    const batch = randomBatch(2, 29);
    const values = computeLosses(batch, motion, denoising, student, 0, 0);
    const n = lossNumbers(values);
    expect(n.overall).toBeCloseTo(n.mse, 12);
  });
});

describe('teacher-copy identity', () => {
  it('motion branch copied from its teacher and fed the teacher input', () => {
    const { motion, denoising, student } = makeModels(31);
    student.motionEncoder.copyFrom(motion.encoder);
    const batch = randomBatch(2, 37);
    // same weights, same input: features agree exactly
    const phiTeacher = motion.feature(batch.xMotion);
    const phiStudent = student.motionEncoder.feature(batch.xMotion);
    const loss = sumSquaredLoss(phiStudent, phiTeacher).dataSync()[0];
    expect(loss).toBe(0);
    void denoising;
  });

  it('denoising branch copied from its teacher', () => {
    const { denoising, student } = makeModels(41);
    student.denoisingEncoder.copyFrom(denoising.encoder);
    const batch = randomBatch(2, 43);
    const a = denoising.feature(batch.xNoise);
    const b = student.denoisingEncoder.feature(batch.xNoise);
    expect(sumSquaredLoss(b, a).dataSync()[0]).toBe(0);
  });
});

describe('squared-norm homogeneity', () => {
  it('doubling both feature maps quadruples the loss', () => {
    const a = tf.randomNormal([2, 8, 8, 4], 0, 1, 'float32', 51);
    const b = tf.randomNormal([2, 8, 8, 4], 0, 1, 'float32', 52);
    const base = sumSquaredLoss(a, b).dataSync()[0];
    const doubled = sumSquaredLoss(a.mul(2), b.mul(2)).dataSync()[0];
    expect(doubled).toBeCloseTo(4 * base, 4);
  });
});

describe('gradient hygiene', () => {
  it('loss gradients with respect to teacher weights are identically zero', () => {
    const { motion, denoising, student } = makeModels(61);
    const batch = randomBatch(2, 67);
    const teacherVars = [...motion.variables(), ...denoising.variables()];
    const studentVars = student.variables();
    const { grads } = tf.variableGrads(
      () => computeLosses(batch, motion, denoising, student, 1.0, 1.0).overall,
      [...teacherVars, ...studentVars],
    );
    let teacherGradNorm = 0;
    let studentGradNorm = 0;
    for (const [name, g] of Object.entries(grads)) {
      const norm = tf.sum(tf.abs(g)).dataSync()[0];
      const isTeacher = teacherVars.some((v) => v.name === name);
      if (isTeacher) teacherGradNorm += norm;
      else studentGradNorm += norm;
    }
    expect(teacherGradNorm).toBe(0);
    expect(studentGradNorm).toBeGreaterThan(0);
  });
});
