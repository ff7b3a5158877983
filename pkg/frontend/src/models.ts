/**
 * Teacher and student architectures.
 *
 * Motion teacher: fully convolutional kernel-prediction network, no skip
 * connections, no pooling or upsampling; the innermost encoder activation
 * is the exported motion feature. Denoising teacher: single-frame
 * encoder-decoder without residual connections. The student duplicates
 * both encoder architectures (motion branch on the noisy dynamic stack,
 * denoising branch on its temporal mean) and decodes the concatenated
 * features with a stack of same-resolution up-convolutions.
 */

import { ConvVars, conv3x3, convRelu, kpnMerge, makeConv } from './ops';
import { tf } from './tfruntime';

export type TeacherKind = 'motion' | 'denoising';

export interface TeacherSpec {
  kind: TeacherKind;
  inChannels: number;
  channels: number;
  encoderLayers: number;
  decoderLayers: number;
  /** Which encoder activation is exported as the feature; the innermost. */
  featureIndex: number;
  /** Merge kernel size; motion teacher only. Odd. */
  kernelSize: number;
}

export function motionTeacherSpec(
  frames: number,
  channels = 8,
  kernelSize = 3,
): TeacherSpec {
  return {
    kind: 'motion',
    inChannels: frames,
    channels,
    encoderLayers: 3,
    decoderLayers: 2,
    featureIndex: 2,
    kernelSize,
  };
}

export function denoisingTeacherSpec(channels = 8): TeacherSpec {
  return {
    kind: 'denoising',
    inChannels: 1,
    channels,
    encoderLayers: 3,
    decoderLayers: 2,
    featureIndex: 2,
    kernelSize: 1,
  };
}

export interface StudentSpec {
  motion: TeacherSpec;
  denoising: TeacherSpec;
  /** Up-convolution stack depth behind the concatenating entrance layer. */
  decoderLayers: number;
  decoderChannels: number;
}

export function studentSpec(
  motion: TeacherSpec,
  denoising: TeacherSpec,
  decoderLayers = 15,
  decoderChannels = 128,
): StudentSpec {
  return { motion, denoising, decoderLayers, decoderChannels };
}

export class Encoder {
  layers: ConvVars[] = [];

  constructor(
    public inChannels: number,
    public channels: number,
    depth: number,
    public featureIndex: number,
    seed: number,
  ) {
    for (let i = 0; i < depth; i++) {
      const cin = i === 0 ? inChannels : channels;
      this.layers.push(makeConv(cin, channels, seed * 1000 + i));
    }
  }

  /** Activations of every layer; the feature is activations[featureIndex]. */
  activations(x: tf.Tensor4D): tf.Tensor4D[] {
    const out: tf.Tensor4D[] = [];
    let h = x;
    for (const layer of this.layers) {
      h = convRelu(h, layer);
      out.push(h);
    }
    return out;
  }

  feature(x: tf.Tensor4D): tf.Tensor4D {
    const acts = this.activations(x);
    const keep = acts[this.featureIndex];
    acts.forEach((a, i) => {
      if (i !== this.featureIndex) a.dispose();
    });
    return keep;
  }

  variables(): tf.Variable[] {
    return this.layers.flatMap((l) => [l.w, l.b]);
  }

  copyFrom(other: Encoder): void {
    const src = other.variables();
    this.variables().forEach((v, i) => v.assign(src[i]));
  }
}

function decoderStack(
  cin: number,
  channels: number,
  depth: number,
  cout: number,
  seed: number,
): ConvVars[] {
  const layers: ConvVars[] = [];
  for (let i = 0; i < depth; i++) {
    layers.push(makeConv(i === 0 ? cin : channels, channels, seed * 1000 + i));
  }
  layers.push(makeConv(channels, cout, seed * 1000 + depth));
  return layers;
}

function runDecoder(h: tf.Tensor4D, layers: ConvVars[]): tf.Tensor4D {
  let x = h;
  for (let i = 0; i < layers.length - 1; i++) x = convRelu(x, layers[i]);
  return conv3x3(x, layers[layers.length - 1]); // linear head
}

export class MotionTeacher {
  encoder: Encoder;
  decoder: ConvVars[];

  constructor(public spec: TeacherSpec, seed: number) {
    if (spec.kind !== 'motion') throw new Error('spec must be a motion spec');
    if (spec.kernelSize % 2 === 0) throw new Error('kernel size must be odd');
    this.encoder = new Encoder(
      spec.inChannels, spec.channels, spec.encoderLayers, spec.featureIndex,
      seed,
    );
    this.decoder = decoderStack(
      spec.channels, spec.channels, spec.decoderLayers,
      spec.inChannels * spec.kernelSize * spec.kernelSize, seed + 7,
    );
  }

  feature(frames: tf.Tensor4D): tf.Tensor4D {
    return this.encoder.feature(frames);
  }

  /** Kernel-merged reconstruction of the stack, (B, H, W, 1). */
  forward(frames: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const feat = this.feature(frames);
      const logits = runDecoder(feat, this.decoder);
      return kpnMerge(frames, logits, this.spec.kernelSize);
    });
  }

  variables(): tf.Variable[] {
    return [...this.encoder.variables(),
            ...this.decoder.flatMap((l) => [l.w, l.b])];
  }
}

export class DenoisingTeacher {
  encoder: Encoder;
  decoder: ConvVars[];

  constructor(public spec: TeacherSpec, seed: number) {
    if (spec.kind !== 'denoising') {
      throw new Error('spec must be a denoising spec');
    }
    this.encoder = new Encoder(
      spec.inChannels, spec.channels, spec.encoderLayers, spec.featureIndex,
      seed,
    );
    // plain conv-deconv stack, no residual connections
    this.decoder = decoderStack(
      spec.channels, spec.channels, spec.decoderLayers, 1, seed + 7,
    );
  }

  feature(frame: tf.Tensor4D): tf.Tensor4D {
    return this.encoder.feature(frame);
  }

  forward(frame: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => runDecoder(this.feature(frame), this.decoder));
  }

  variables(): tf.Variable[] {
    return [...this.encoder.variables(),
            ...this.decoder.flatMap((l) => [l.w, l.b])];
  }
}

export interface StudentForward {
  output: tf.Tensor4D;
  motionFeature: tf.Tensor4D;
  denoisingFeature: tf.Tensor4D;
}

export class Student {
  motionEncoder: Encoder;
  denoisingEncoder: Encoder;
  decoder: ConvVars[];

  constructor(public spec: StudentSpec, seed: number) {
    this.motionEncoder = new Encoder(
      spec.motion.inChannels, spec.motion.channels, spec.motion.encoderLayers,
      spec.motion.featureIndex, seed,
    );
    this.denoisingEncoder = new Encoder(
      spec.denoising.inChannels, spec.denoising.channels,
      spec.denoising.encoderLayers, spec.denoising.featureIndex, seed + 13,
    );
    this.decoder = decoderStack(
      spec.motion.channels + spec.denoising.channels,
      spec.decoderChannels, spec.decoderLayers, 1, seed + 29,
    );
  }

  /** Full forward pass on the noisy dynamic stack and its temporal mean. */
  forward(xQis: tf.Tensor4D, xQisMean: tf.Tensor4D): StudentForward {
    const motionFeature = this.motionEncoder.feature(xQis);
    const denoisingFeature = this.denoisingEncoder.feature(xQisMean);
    const output = tf.tidy(() => {
      const merged = tf.concat([motionFeature, denoisingFeature], 3) as tf.Tensor4D;
      return runDecoder(merged, this.decoder);
    });
    return { output, motionFeature, denoisingFeature };
  }

  decoderVariables(): tf.Variable[] {
    return this.decoder.flatMap((l) => [l.w, l.b]);
  }

  encoderVariables(): tf.Variable[] {
    return [...this.motionEncoder.variables(),
            ...this.denoisingEncoder.variables()];
  }

  variables(): tf.Variable[] {
    return [...this.encoderVariables(), ...this.decoderVariables()];
  }
}

/** Single-encoder baseline (no teachers): one stack encoder + decoder. */
export class SingleEncoderBaseline {
  encoder: Encoder;
  decoder: ConvVars[];

  constructor(public spec: StudentSpec, seed: number) {
    // one encoder as wide as the student's two combined
    this.encoder = new Encoder(
      spec.motion.inChannels,
      spec.motion.channels + spec.denoising.channels,
      spec.motion.encoderLayers, spec.motion.featureIndex, seed,
    );
    this.decoder = decoderStack(
      spec.motion.channels + spec.denoising.channels,
      spec.decoderChannels, spec.decoderLayers, 1, seed + 29,
    );
  }

  forward(xQis: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => runDecoder(this.encoder.feature(xQis), this.decoder));
  }

  variables(): tf.Variable[] {
    return [...this.encoder.variables(),
            ...this.decoder.flatMap((l) => [l.w, l.b])];
  }
}

/**
 * Multi-frame encoder-decoder baseline with residual connections and a
 * frame-pooling entrance (the single-frame denoiser generalized to take
 * the whole stack); trained with plain MSE as an optional comparison.
 */
export class MultiFrameRed {
  entrance: ConvVars;
  encoder: Encoder;
  decoder: ConvVars[];

  constructor(public frames: number, public channels: number, seed: number) {
    this.entrance = makeConv(frames, channels, seed + 3);
    this.encoder = new Encoder(channels, channels, 3, 2, seed);
    this.decoder = decoderStack(channels, channels, 2, 1, seed + 7);
  }

  forward(xQis: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const pooled = convRelu(xQis, this.entrance);
      const feat = this.encoder.feature(pooled);
      const skip = tf.add(feat, pooled) as tf.Tensor4D; // residual connection
      return runDecoder(skip, this.decoder);
    });
  }

  variables(): tf.Variable[] {
    return [this.entrance.w, this.entrance.b, ...this.encoder.variables(),
            ...this.decoder.flatMap((l) => [l.w, l.b])];
  }
}
