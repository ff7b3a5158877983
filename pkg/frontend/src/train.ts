/**
 * Training loops for the teachers and the student.
 *
 * Teachers are pretrained on their own views (clean dynamic stacks for the
 * motion teacher, noisy static frames for the denoising teacher) with MSE.
 * The student trains on the noisy dynamic stack under the annealed
 * overall loss; teacher variables are never in any optimizer's variable
 * list. Everything is deterministic at a fixed seed: variable inits are
 * seeded, batch order comes from a seeded shuffle, and the single-threaded
 * kernels are order-stable.
 */

import { Batch, TripletTensors, disposeBatch, makeBatch } from './data';
import { LossNumbers, computeLosses, lossNumbers } from './losses';
import { DenoisingTeacher, MotionTeacher, Student } from './models';
import { sumSquaredLoss } from './ops';
import { ScheduleSpec, lambdasAt, validateSchedule } from './schedule';
import { makeRng, shuffled, tf } from './tfruntime';

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export interface EpochRecord {
  epoch: number;
  loss: number;
}

export interface StudentEpochRecord {
  epoch: number;
  mse: number;
  motion: number;
  noise: number;
  overall: number;
  lambda1: number;
  lambda2: number;
}

function epochBatches(
  count: number,
  batchSize: number,
  rng: () => number,
): number[][] {
  const order = shuffled([...Array(count).keys()], rng);
  const out: number[][] = [];
  for (let i = 0; i < order.length; i += batchSize) {
    out.push(order.slice(i, i + batchSize));
  }
  return out;
}

function runEpochs(
  data: TripletTensors[],
  opts: TrainOptions,
  step: (batch: Batch, epoch: number) => number,
): EpochRecord[] {
  if (data.length === 0) throw new Error('empty dataset');
  const rng = makeRng(opts.seed);
  const curve: EpochRecord[] = [];
  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    let total = 0;
    let batches = 0;
    for (const idx of epochBatches(data.length, opts.batchSize, rng)) {
      const batch = makeBatch(data, idx);
      total += step(batch, epoch);
      batches += 1;
      disposeBatch(batch);
    }
    curve.push({ epoch, loss: total / batches });
  }
  return curve;
}

export function trainMotionTeacher(
  teacher: MotionTeacher,
  data: TripletTensors[],
  opts: TrainOptions,
): EpochRecord[] {
  const optimizer = tf.train.adam(opts.learningRate);
  const vars = teacher.variables();
  const curve = runEpochs(data, opts, (batch) => {
    const loss = optimizer.minimize(
      () => sumSquaredLoss(teacher.forward(batch.xMotion), batch.xTrue),
      true,
      vars,
    ) as tf.Scalar;
    const value = loss.dataSync()[0];
    loss.dispose();
    return value;
  });
  optimizer.dispose();
  return curve;
}

export function trainDenoisingTeacher(
  teacher: DenoisingTeacher,
  data: TripletTensors[],
  opts: TrainOptions,
): EpochRecord[] {
  const optimizer = tf.train.adam(opts.learningRate);
  const vars = teacher.variables();
  const curve = runEpochs(data, opts, (batch) => {
    const loss = optimizer.minimize(
      () => sumSquaredLoss(teacher.forward(batch.xNoise), batch.xTrue),
      true,
      vars,
    ) as tf.Scalar;
    const value = loss.dataSync()[0];
    loss.dispose();
    return value;
  });
  optimizer.dispose();
  return curve;
}

export interface StudentTrainResult {
  curve: StudentEpochRecord[];
}

export function trainStudent(
  student: Student,
  motionTeacher: MotionTeacher,
  denoisingTeacher: DenoisingTeacher,
  data: TripletTensors[],
  schedule: ScheduleSpec,
  opts: Omit<TrainOptions, 'epochs'>,
  trainableVars?: tf.Variable[],
): StudentTrainResult {
  validateSchedule(schedule);
  const optimizer = tf.train.adam(opts.learningRate);
  const vars = trainableVars ?? student.variables();
  const perEpoch: StudentEpochRecord[] = [];
  let epochAccum: LossNumbers[] = [];

  const curve = runEpochs(
    data,
    { ...opts, epochs: schedule.totalEpochs },
    (batch, epoch) => {
      const [l1, l2] = lambdasAt(schedule, epoch);
      let current: LossNumbers | null = null;
      const loss = optimizer.minimize(
        () => {
          const values = computeLosses(
            batch, motionTeacher, denoisingTeacher, student, l1, l2,
          );
          current = lossNumbers(values);
          return values.overall;
        },
        true,
        vars,
      ) as tf.Scalar;
      loss.dispose();
      epochAccum.push(current as unknown as LossNumbers);
      return (current as unknown as LossNumbers).overall;
    },
  );

  // regroup per-step numbers into epoch averages
  const steps = epochAccum.length / curve.length;
  curve.forEach((rec, e) => {
    const chunk = epochAccum.slice(e * steps, (e + 1) * steps);
    const avg = (f: (n: LossNumbers) => number) =>
      chunk.reduce((s, n) => s + f(n), 0) / chunk.length;
    const [l1, l2] = lambdasAt(schedule, rec.epoch);
    perEpoch.push({
      epoch: rec.epoch,
      mse: avg((n) => n.mse),
      motion: avg((n) => n.motion),
      noise: avg((n) => n.noise),
      overall: avg((n) => n.overall),
      lambda1: l1,
      lambda2: l2,
    });
  });
  optimizer.dispose();
  return { curve: perEpoch };
}

/** MSE-only training for baselines that read the noisy stack directly. */
export function trainPlainMse(
  forward: (xQis: tf.Tensor4D) => tf.Tensor4D,
  vars: tf.Variable[],
  data: TripletTensors[],
  opts: TrainOptions,
): EpochRecord[] {
  const optimizer = tf.train.adam(opts.learningRate);
  const curve = runEpochs(data, opts, (batch) => {
    const loss = optimizer.minimize(
      () => sumSquaredLoss(forward(batch.xQis), batch.xTrue),
      true,
      vars,
    ) as tf.Scalar;
    const value = loss.dataSync()[0];
    loss.dispose();
    return value;
  });
  optimizer.dispose();
  return curve;
}

/** PSNR in dB (max 1.0) of the student output against ground truth. */
export function evalPsnr(
  forward: (batch: Batch) => tf.Tensor4D,
  data: TripletTensors[],
  batchSize = 8,
): number {
  const values: number[] = [];
  for (let i = 0; i < data.length; i += batchSize) {
    const idx = [...Array(Math.min(batchSize, data.length - i)).keys()].map(
      (j) => i + j,
    );
    const batch = makeBatch(data, idx);
    const psnrs = tf.tidy(() => {
      const out = tf.clipByValue(forward(batch), 0, 1);
      const mse = tf.mean(tf.square(tf.sub(out, batch.xTrue)), [1, 2, 3]);
      return mse.dataSync();
    });
    for (const m of psnrs) {
      values.push(m === 0 ? 99 : Math.min(10 * Math.log10(1 / m), 99));
    }
    disposeBatch(batch);
  }
  return values.reduce((a, b) => a + b, 0) / values.length;
}
