/** Weight checkpoints: named float32 blobs in a single JSON document. */

import * as fs from 'fs';

import { tf } from './tfruntime';

export interface Checkpoint {
  [name: string]: { shape: number[]; data: string };
}

export function weightsToCheckpoint(vars: tf.Variable[]): Checkpoint {
  const out: Checkpoint = {};
  vars.forEach((v, i) => {
    const values = v.dataSync() as Float32Array;
    out[`var_${i}`] = {
      shape: v.shape.slice(),
      data: Buffer.from(values.buffer, values.byteOffset,
                        values.byteLength).toString('base64'),
    };
  });
  return out;
}

export function saveCheckpoint(vars: tf.Variable[], filePath: string): void {
  fs.writeFileSync(filePath, JSON.stringify(weightsToCheckpoint(vars)));
}

export function loadCheckpoint(vars: tf.Variable[], filePath: string): void {
  const doc = JSON.parse(fs.readFileSync(filePath, 'utf-8')) as Checkpoint;
  vars.forEach((v, i) => {
    const entry = doc[`var_${i}`];
    if (!entry) throw new Error(`checkpoint missing var_${i}`);
    const buf = Buffer.from(entry.data, 'base64');
    const values = new Float32Array(buf.buffer, buf.byteOffset,
                                    buf.byteLength / 4);
    v.assign(tf.tensor(Array.from(values), entry.shape));
  });
}

/** Byte-level fingerprint of the variables, for frozen-weight checks. */
export function weightsDigest(vars: tf.Variable[]): string {
  return vars
    .map((v) => Buffer.from((v.dataSync() as Float32Array).buffer).toString('base64'))
    .join('|');
}
