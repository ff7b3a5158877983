/**
 * Train the student-teacher stack from a triplet manifest.
 *
 * Usage:
 *   node dist/cli.js --manifest data/manifest.json --out runs/demo \
 *     [--epochs 20] [--teacher-epochs 10] [--batch 16] [--lr 1e-3] \
 *     [--seed 1] [--channels 8] [--decoder-layers 15] [--held-out 0.2]
 *
 * Writes teacher/student checkpoints, the student loss-curve CSV, and a
 * run metadata document (optimizer choice included) into the output dir.
 */

import * as fs from 'fs';
import * as path from 'path';

import { loadTriplets } from './data';
import { readManifest } from './formats';
import { saveCheckpoint } from './checkpoint';
import { lossCurveCsv, writeText } from './csv';
import {
  DenoisingTeacher,
  MotionTeacher,
  Student,
  denoisingTeacherSpec,
  motionTeacherSpec,
  studentSpec,
} from './models';
import { defaultSchedule } from './schedule';
import {
  evalPsnr,
  trainDenoisingTeacher,
  trainMotionTeacher,
  trainStudent,
} from './train';
import { backendName, initBackend } from './tfruntime';

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`bad argument ${argv[i]}`);
    }
    out.set(argv[i].slice(2), argv[i + 1]);
  }
  return out;
}

async function main(): Promise<number> {
  const args = parseArgs(process.argv.slice(2));
  const manifestPath = args.get('manifest');
  const outDir = args.get('out');
  if (!manifestPath || !outDir) {
    console.error('required: --manifest <path> --out <dir>');
    return 1;
  }
  const epochs = parseInt(args.get('epochs') ?? '20', 10);
  const teacherEpochs = parseInt(args.get('teacher-epochs') ?? '10', 10);
  const batchSize = parseInt(args.get('batch') ?? '16', 10);
  const learningRate = parseFloat(args.get('lr') ?? '1e-3');
  const seed = parseInt(args.get('seed') ?? '1', 10);
  const channels = parseInt(args.get('channels') ?? '8', 10);
  const decoderLayers = parseInt(args.get('decoder-layers') ?? '15', 10);
  const heldOutFrac = parseFloat(args.get('held-out') ?? '0.2');

  await initBackend();
  console.log(`backend: ${backendName()}`);

  const entries = readManifest(manifestPath);
  const frames = entries[0].config.frames_per_burst;
  const all = loadTriplets(entries);
  const splitAt = Math.max(1, Math.floor(all.length * (1 - heldOutFrac)));
  const train = all.slice(0, splitAt);
  const heldOut = all.slice(splitAt);
  console.log(`${train.length} training / ${heldOut.length} held-out triplets`);

  const mSpec = motionTeacherSpec(frames, channels);
  const dSpec = denoisingTeacherSpec(channels);
  const sSpec = studentSpec(mSpec, dSpec, decoderLayers, channels);

  fs.mkdirSync(outDir, { recursive: true });

  const motion = new MotionTeacher(mSpec, seed + 101);
  const dn = new DenoisingTeacher(dSpec, seed + 202);
  const tOpts = { epochs: teacherEpochs, batchSize, learningRate, seed };
  console.log('training motion teacher...');
  trainMotionTeacher(motion, train, tOpts);
  console.log('training denoising teacher...');
  trainDenoisingTeacher(dn, train, tOpts);
  saveCheckpoint(motion.variables(), path.join(outDir, 'motion_teacher.json'));
  saveCheckpoint(dn.variables(), path.join(outDir, 'denoising_teacher.json'));

  const schedule = { ...defaultSchedule(epochs) };
  const student = new Student(sSpec, seed + 707);
  console.log('training student...');
  const { curve } = trainStudent(student, motion, dn, train, schedule, {
    batchSize, learningRate, seed,
  });
  saveCheckpoint(student.variables(), path.join(outDir, 'student.json'));
  writeText(lossCurveCsv(curve), path.join(outDir, 'loss_curve.csv'));

  const psnr = heldOut.length
    ? evalPsnr((b) => student.forward(b.xQis, b.xQisMean).output, heldOut)
    : NaN;
  const meta = {
    optimizer: 'adam',
    learningRate,
    batchSize,
    epochs,
    teacherEpochs,
    seed,
    channels,
    decoderLayers,
    backend: backendName(),
    heldOutPsnrDb: psnr,
  };
  fs.writeFileSync(path.join(outDir, 'run.json'),
                   JSON.stringify(meta, null, 2));
  console.log(`held-out PSNR: ${psnr.toFixed(2)} dB`);
  return 0;
}

main().then((code) => process.exit(code), (err) => {
  console.error(err);
  process.exit(2);
});
