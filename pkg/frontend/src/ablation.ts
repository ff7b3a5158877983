/**
 * Ablation protocol over the training configurations:
 *
 *   A          frozen pretrained teacher encoders + trainable decoder
 *   B          one (wider) encoder, no teachers
 *   ours-i     denoising teacher only (lambda1 = 0)
 *   ours-ii    motion teacher only (lambda2 = 0)
 *   ours-full  both teachers
 *   mred       multi-frame residual encoder-decoder baseline, plain MSE
 *
 * Every config trains on the same data with the same seeds; held-out PSNR
 * is reported per config.
 */

import { TripletTensors } from './data';
import {
  DenoisingTeacher,
  MotionTeacher,
  MultiFrameRed,
  SingleEncoderBaseline,
  Student,
  StudentSpec,
} from './models';
import { ScheduleSpec } from './schedule';
import {
  TrainOptions,
  evalPsnr,
  trainDenoisingTeacher,
  trainMotionTeacher,
  trainPlainMse,
  trainStudent,
} from './train';
import { tf } from './tfruntime';

export const ABLATION_CONFIGS = [
  'A', 'B', 'ours-i', 'ours-ii', 'ours-full', 'mred',
] as const;

export type AblationConfig = (typeof ABLATION_CONFIGS)[number];

export interface AblationOptions {
  spec: StudentSpec;
  schedule: ScheduleSpec;
  teacherEpochs: number;
  batchSize: number;
  learningRate: number;
}

export interface AblationResult {
  config: AblationConfig;
  psnrDb: number;
  trainableParams: number;
}

/** Reject weight assignments that contradict a config's definition. */
export function validateConfigLambdas(
  config: AblationConfig,
  lambda1: number,
  lambda2: number,
): void {
  const fail = (msg: string) => {
    throw new Error(`malformed config ${config}: ${msg}`);
  };
  if (config === 'A' || config === 'B' || config === 'mred') {
    if (lambda1 !== 0 || lambda2 !== 0) fail('teacher losses must be off');
  }
  if (config === 'ours-i' && lambda1 !== 0) {
    fail('motion-teacher weight lambda1 must be 0');
  }
  if (config === 'ours-ii' && lambda2 !== 0) {
    fail('denoising-teacher weight lambda2 must be 0');
  }
}

/** The config's schedule: teacher-loss weights zeroed per its definition. */
export function scheduleFor(
  config: AblationConfig,
  base: ScheduleSpec,
): ScheduleSpec {
  const s = { ...base };
  if (config === 'A' || config === 'B' || config === 'mred') {
    s.lambda1Init = 0;
    s.lambda2Init = 0;
  } else if (config === 'ours-i') {
    s.lambda1Init = 0;
  } else if (config === 'ours-ii') {
    s.lambda2Init = 0;
  }
  validateConfigLambdas(config, s.lambda1Init, s.lambda2Init);
  return s;
}

function paramCount(vars: tf.Variable[]): number {
  return vars.reduce((s, v) => s + v.size, 0);
}

export interface PretrainedTeachers {
  motion: MotionTeacher;
  denoising: DenoisingTeacher;
}

export function pretrainTeachers(
  spec: StudentSpec,
  train: TripletTensors[],
  opts: AblationOptions,
  seed: number,
): PretrainedTeachers {
  const motion = new MotionTeacher(spec.motion, seed + 101);
  const denoising = new DenoisingTeacher(spec.denoising, seed + 202);
  const teacherOpts: TrainOptions = {
    epochs: opts.teacherEpochs,
    batchSize: opts.batchSize,
    learningRate: opts.learningRate,
    seed: seed + 303,
  };
  trainMotionTeacher(motion, train, teacherOpts);
  trainDenoisingTeacher(denoising, train, teacherOpts);
  return { motion, denoising };
}

export function runConfig(
  config: AblationConfig,
  teachers: PretrainedTeachers,
  spec: StudentSpec,
  train: TripletTensors[],
  heldOut: TripletTensors[],
  opts: AblationOptions,
  seed: number,
): AblationResult {
  const schedule = scheduleFor(config, opts.schedule);
  const baseOpts: TrainOptions = {
    epochs: schedule.totalEpochs,
    batchSize: opts.batchSize,
    learningRate: opts.learningRate,
    seed: seed + 404,
  };

  if (config === 'B') {
    const model = new SingleEncoderBaseline(spec, seed + 505);
    trainPlainMse((x) => model.forward(x), model.variables(), train, baseOpts);
    return {
      config,
      psnrDb: evalPsnr((b) => model.forward(b.xQis), heldOut),
      trainableParams: paramCount(model.variables()),
    };
  }

  if (config === 'mred') {
    const model = new MultiFrameRed(
      spec.motion.inChannels, spec.decoderChannels, seed + 606,
    );
    trainPlainMse((x) => model.forward(x), model.variables(), train, baseOpts);
    return {
      config,
      psnrDb: evalPsnr((b) => model.forward(b.xQis), heldOut),
      trainableParams: paramCount(model.variables()),
    };
  }

  const student = new Student(spec, seed + 707);
  // all student configs start their branches as copies of the pretrained
  // teacher encoders; config A freezes them, the others keep training
  student.motionEncoder.copyFrom(teachers.motion.encoder);
  student.denoisingEncoder.copyFrom(teachers.denoising.encoder);
  let trainable = student.variables();
  if (config === 'A') {
    trainable = student.decoderVariables();
  }
  trainStudent(
    student, teachers.motion, teachers.denoising, train, schedule,
    { batchSize: opts.batchSize, learningRate: opts.learningRate,
      seed: seed + 404 },
    trainable,
  );
  return {
    config,
    psnrDb: evalPsnr(
      (b) => student.forward(b.xQis, b.xQisMean).output, heldOut,
    ),
    trainableParams: paramCount(trainable),
  };
}

export function runAblation(
  configs: AblationConfig[],
  spec: StudentSpec,
  train: TripletTensors[],
  heldOut: TripletTensors[],
  opts: AblationOptions,
  seeds: number[],
): Map<AblationConfig, number> {
  for (const c of configs) {
    if (!ABLATION_CONFIGS.includes(c)) {
      throw new Error(`unknown ablation config ${c}`);
    }
  }
  const table = new Map<AblationConfig, number>();
  for (const config of configs) {
    const scores: number[] = [];
    for (const seed of seeds) {
      const teachers = pretrainTeachers(spec, train, opts, seed);
      const result = runConfig(
        config, teachers, spec, train, heldOut, opts, seed,
      );
      scores.push(result.psnrDb);
    }
    table.set(config, scores.reduce((a, b) => a + b, 0) / scores.length);
  }
  return table;
}
