/**
 * Triplet loading: manifest entries to training tensors.
 *
 * Burst counts are normalized by the ADC ceiling (2^bits - 1) so network
 * inputs live in [0, 1]. The noisy dynamic stack is exposed both as the
 * full (H, W, T) tensor for the motion branch and as its temporal mean
 * (H, W, 1) for the single-frame denoising branch, mirroring how a
 * single-frame denoiser is applied to a burst.
 */

import { BurstData, ManifestEntry, readPgm, readQisb } from './formats';
import { tf } from './tfruntime';

export interface TripletTensors {
  /** Ground truth at the reference pose, (H, W, 1). */
  xTrue: tf.Tensor3D;
  /** Clean dynamic stack, (H, W, T). */
  xMotion: tf.Tensor3D;
  /** Noisy static single frame, (H, W, 1). */
  xNoise: tf.Tensor3D;
  /** Noisy dynamic stack, (H, W, T). */
  xQis: tf.Tensor3D;
  /** Temporal mean of xQis, (H, W, 1). */
  xQisMean: tf.Tensor3D;
}

function burstToTensor(burst: BurstData): tf.Tensor3D {
  const { frameCount, height, width, counts, adcBits } = burst;
  const top = (1 << adcBits) - 1;
  const hw = height * width;
  const out = new Float32Array(hw * frameCount);
  // frame-major on disk -> channel-last in memory
  for (let t = 0; t < frameCount; t++) {
    for (let i = 0; i < hw; i++) {
      out[i * frameCount + t] = counts[t * hw + i] / top;
    }
  }
  return tf.tensor3d(out, [height, width, frameCount]);
}

export function loadTriplet(entry: ManifestEntry): TripletTensors {
  const truth = readPgm(entry.x_true);
  const xTrue = tf.tensor3d(truth.data, [truth.height, truth.width, 1]);

  const frames = entry.x_motion.map(readPgm);
  const t = frames.length;
  const hw = truth.height * truth.width;
  const motion = new Float32Array(hw * t);
  frames.forEach((f, ti) => {
    for (let i = 0; i < hw; i++) motion[i * t + ti] = f.data[i];
  });
  const xMotion = tf.tensor3d(motion, [truth.height, truth.width, t]);

  const xNoise = burstToTensor(readQisb(entry.x_noise));
  const xQis = burstToTensor(readQisb(entry.x_qis));
  const xQisMean = tf.tidy(() => tf.mean(xQis, 2, true) as tf.Tensor3D);
  return { xTrue, xMotion, xNoise, xQis, xQisMean };
}

export function loadTriplets(entries: ManifestEntry[]): TripletTensors[] {
  return entries.map(loadTriplet);
}

export function disposeTriplet(t: TripletTensors): void {
  t.xTrue.dispose();
  t.xMotion.dispose();
  t.xNoise.dispose();
  t.xQis.dispose();
  t.xQisMean.dispose();
}

/** Stack a list of (H, W, C) tensors into one (B, H, W, C) batch. */
export function toBatch(items: tf.Tensor3D[]): tf.Tensor4D {
  return tf.stack(items, 0) as tf.Tensor4D;
}

export interface Batch {
  xTrue: tf.Tensor4D;
  xMotion: tf.Tensor4D;
  xNoise: tf.Tensor4D;
  xQis: tf.Tensor4D;
  xQisMean: tf.Tensor4D;
}

export function makeBatch(triplets: TripletTensors[], idx: number[]): Batch {
  return tf.tidy(() => ({
    xTrue: toBatch(idx.map((i) => triplets[i].xTrue)),
    xMotion: toBatch(idx.map((i) => triplets[i].xMotion)),
    xNoise: toBatch(idx.map((i) => triplets[i].xNoise)),
    xQis: toBatch(idx.map((i) => triplets[i].xQis)),
    xQisMean: toBatch(idx.map((i) => triplets[i].xQisMean)),
  }));
}

export function disposeBatch(b: Batch): void {
  b.xTrue.dispose();
  b.xMotion.dispose();
  b.xNoise.dispose();
  b.xQis.dispose();
  b.xQisMean.dispose();
}
