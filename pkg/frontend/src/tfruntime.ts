/**
 * TensorFlow.js runtime setup and deterministic helpers.
 *
 * The WASM backend is used when available (the pure-JS CPU backend is far
 * too slow for convolutional training); convolutions elsewhere in this
 * package are expressed as pad/slice/concat/matMul so that both forward
 * and gradient kernels exist on WASM.
 */

import * as tf from '@tensorflow/tfjs';
import * as path from 'path';

let ready: Promise<void> | null = null;

export function initBackend(): Promise<void> {
  if (!ready) {
    ready = (async () => {
      try {
        // eslint-disable-next-line @typescript-eslint/no-var-requires
        const wasm = require('@tensorflow/tfjs-backend-wasm');
        const dist = path.join(
          path.dirname(require.resolve('@tensorflow/tfjs-backend-wasm')),
        );
        wasm.setWasmPaths(dist + path.sep);
        const ok = await tf.setBackend('wasm');
        if (!ok) await tf.setBackend('cpu');
      } catch {
        await tf.setBackend('cpu');
      }
      await tf.ready();
    })();
  }
  return ready;
}

export function backendName(): string {
  return tf.getBackend();
}

/** Deterministic 32-bit PRNG (mulberry32) for shuffles and host-side draws. */
export function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function shuffled<T>(items: T[], rng: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

export { tf };
