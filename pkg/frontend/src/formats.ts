/**
 * Readers for the primary toolkit's external file formats: binary PGM
 * scenes, QISB burst containers with JSON sidecars, and triplet manifests.
 */

import * as fs from 'fs';
import * as path from 'path';

export interface GrayImage {
  height: number;
  width: number;
  /** Row-major values in [0, 1]. */
  data: Float32Array;
}

export function readPgm(filePath: string): GrayImage {
  const raw = fs.readFileSync(filePath);
  const header = raw.subarray(0, 64).toString('latin1');
  const m = /^P5\s+(\d+)\s+(\d+)\s+(\d+)\s/.exec(header);
  if (!m) throw new Error(`${filePath}: not a binary P5 graymap`);
  const width = parseInt(m[1], 10);
  const height = parseInt(m[2], 10);
  const maxval = parseInt(m[3], 10);
  const offset = m[0].length;
  const n = width * height;
  const data = new Float32Array(n);
  if (maxval > 255) {
    if (raw.length < offset + 2 * n) throw new Error(`${filePath}: truncated`);
    for (let i = 0; i < n; i++) {
      data[i] = raw.readUInt16BE(offset + 2 * i) / maxval;
    }
  } else {
    if (raw.length < offset + n) throw new Error(`${filePath}: truncated`);
    for (let i = 0; i < n; i++) data[i] = raw[offset + i] / maxval;
  }
  return { height, width, data };
}

export function writePgm(img: GrayImage, filePath: string): void {
  const header = Buffer.from(`P5\n${img.width} ${img.height}\n65535\n`, 'ascii');
  const body = Buffer.alloc(img.width * img.height * 2);
  for (let i = 0; i < img.data.length; i++) {
    const q = Math.min(65535, Math.floor(img.data[i] * 65535 + 0.5));
    body.writeUInt16BE(Math.max(0, q), 2 * i);
  }
  fs.writeFileSync(filePath, Buffer.concat([header, body]));
}

export interface SensorConfigMeta {
  gain_alpha: number;
  dark_current_rate: number;
  read_noise_sigma: number;
  adc_bits: number;
  single_bit_threshold: number;
  integration_time: number;
  frames_per_burst: number;
}

export interface BurstData {
  frameCount: number;
  height: number;
  width: number;
  adcBits: number;
  /** Frame-major, row-major raw counts. */
  counts: Uint8Array;
  config: SensorConfigMeta;
  seed: number;
}

const QISB_MAGIC = 0x42534951; // "QISB" little-endian

export function readQisb(filePath: string): BurstData {
  const raw = fs.readFileSync(filePath);
  if (raw.length < 24) throw new Error(`${filePath}: truncated header`);
  if (raw.readUInt32LE(0) !== QISB_MAGIC) {
    throw new Error(`${filePath}: bad magic`);
  }
  const version = raw.readUInt32LE(4);
  if (version !== 1) throw new Error(`${filePath}: unsupported version ${version}`);
  const height = raw.readUInt32LE(8);
  const width = raw.readUInt32LE(12);
  const frameCount = raw.readUInt32LE(16);
  const adcBits = raw.readUInt8(20);
  const n = height * width * frameCount;
  if (raw.length < 24 + n) throw new Error(`${filePath}: truncated payload`);
  const counts = new Uint8Array(raw.subarray(24, 24 + n));
  const meta = JSON.parse(fs.readFileSync(`${filePath}.meta`, 'utf-8'));
  return {
    frameCount,
    height,
    width,
    adcBits,
    counts,
    config: meta.config as SensorConfigMeta,
    seed: meta.seed as number,
  };
}

export interface ManifestEntry {
  x_true: string;
  x_motion: string[];
  x_noise: string;
  x_qis: string;
  trajectory: number[][];
  config: SensorConfigMeta;
  seed: number;
  local_mask?: string;
  local_transforms?: number[][];
}

export function readManifest(filePath: string): ManifestEntry[] {
  const doc = JSON.parse(fs.readFileSync(filePath, 'utf-8'));
  if (doc.format !== 'qis-triplets') {
    throw new Error(`${filePath}: not a triplet manifest`);
  }
  const base = path.dirname(path.resolve(filePath));
  const resolve = (p: string) =>
    path.isAbsolute(p) ? p : path.resolve(base, path.basename(p));
  return (doc.triplets as ManifestEntry[]).map((e) => ({
    ...e,
    x_true: resolve(e.x_true),
    x_motion: e.x_motion.map(resolve),
    x_noise: resolve(e.x_noise),
    x_qis: resolve(e.x_qis),
  }));
}
