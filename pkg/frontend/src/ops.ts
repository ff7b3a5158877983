/**
 * Conv building blocks with WASM-trainable gradients.
 *
 * tf.conv2d's gradient kernels are missing on the WASM backend, so 3x3
 * convolutions are expressed as pad + 9 slices + concat + matMul (im2col);
 * every op in that chain has forward and gradient kernels everywhere.
 * All layers are stride 1 / SAME, so spatial dimensions are preserved
 * end to end (the architectures here use no pooling or upsampling).
 */

import { tf } from './tfruntime';

/** Weights for one 3x3 conv expressed as a (9*cin, cout) matrix + bias. */
export interface ConvVars {
  w: tf.Variable;
  b: tf.Variable;
}

export function makeConv(
  cin: number,
  cout: number,
  seed: number,
  scale = 0.1,
): ConvVars {
  const w = tf.variable(
    tf.randomNormal([9 * cin, cout], 0, scale, 'float32', seed),
  );
  const b = tf.variable(tf.zeros([cout]));
  return { w, b };
}

export function conv3x3(x: tf.Tensor4D, vars: ConvVars): tf.Tensor4D {
  return tf.tidy(() => {
    const [batch, h, w, c] = x.shape;
    const padded = tf.pad(x, [[0, 0], [1, 1], [1, 1], [0, 0]]);
    const cols: tf.Tensor4D[] = [];
    for (let dy = 0; dy < 3; dy++) {
      for (let dx = 0; dx < 3; dx++) {
        cols.push(tf.slice(padded, [0, dy, dx, 0], [batch, h, w, c]));
      }
    }
    const im = tf.reshape(tf.concat(cols, 3), [batch * h * w, 9 * c]);
    const out = tf.reshape(tf.matMul(im, vars.w as tf.Tensor2D), [
      batch,
      h,
      w,
      vars.w.shape[1] as number,
    ]);
    return tf.add(out, vars.b) as tf.Tensor4D;
  });
}

export function convRelu(x: tf.Tensor4D, vars: ConvVars): tf.Tensor4D {
  return tf.tidy(() => tf.relu(conv3x3(x, vars)));
}

/**
 * Kernel-prediction merge: per-pixel softmax weights over (T, K, K)
 * combine shifted copies of the frame stack into one image.
 *
 * frames: (B, H, W, T); logits: (B, H, W, T*K*K) -> (B, H, W, 1)
 */
export function kpnMerge(
  frames: tf.Tensor4D,
  logits: tf.Tensor4D,
  kernelSize: number,
): tf.Tensor4D {
  const k = kernelSize;
  const r = Math.floor(k / 2);
  return tf.tidy(() => {
    const [batch, h, w, t] = frames.shape;
    const weights = tf.softmax(logits, 3);
    const padded = tf.pad(frames, [[0, 0], [r, r], [r, r], [0, 0]]);
    let acc: tf.Tensor4D | null = null;
    for (let ti = 0; ti < t; ti++) {
      for (let ky = 0; ky < k; ky++) {
        for (let kx = 0; kx < k; kx++) {
          const shifted = tf.slice(padded, [0, ky, kx, ti], [batch, h, w, 1]);
          const idx = ti * k * k + ky * k + kx;
          const wSlice = tf.slice(weights, [0, 0, 0, idx], [batch, h, w, 1]);
          const term = tf.mul(shifted, wSlice) as tf.Tensor4D;
          acc = acc === null ? term : (tf.add(acc, term) as tf.Tensor4D);
        }
      }
    }
    return acc as tf.Tensor4D;
  });
}

/** Sum of squared differences, averaged over the batch dimension. */
export function sumSquaredLoss(a: tf.Tensor, b: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const batch = a.shape[0] as number;
    return tf.div(tf.sum(tf.square(tf.sub(a, b))), batch) as tf.Scalar;
  });
}

/**
 * Gradient barrier: identity forward, zero gradient backward. Teacher
 * activations pass through this so the loss is exactly insensitive to
 * teacher weights under autodiff.
 */
export function detach<T extends tf.Tensor>(t: T): T {
  const barrier = tf.customGrad(
    (x, save) => {
      const tensor = x as tf.Tensor;
      (save as tf.GradSaveFunc)([tensor]);
      return {
        value: tensor.clone(),
        gradFunc: (dy: tf.Tensor) => [tf.zerosLike(dy)],
      };
    },
  );
  return barrier(t) as T;
}
