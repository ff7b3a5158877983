/**
 * Training objective: reconstruction MSE plus the two feature-matching
 * (perceptual) terms against the frozen teachers,
 *
 *   overall = mse + lambda1 * motion + lambda2 * noise
 *
 * where motion compares the student's motion-branch features on the noisy
 * dynamic stack with the motion teacher's features on the clean stack,
 * and noise compares the denoising-branch features with the denoising
 * teacher's features on the noisy static frame. Norms are sums of squares
 * over all elements, averaged over the batch. Teacher activations are
 * detached, so no gradient ever reaches teacher weights.
 */

import { Batch } from './data';
import { DenoisingTeacher, MotionTeacher, Student } from './models';
import { detach, sumSquaredLoss } from './ops';
import { tf } from './tfruntime';

export interface LossValues {
  mse: tf.Scalar;
  motion: tf.Scalar;
  noise: tf.Scalar;
  overall: tf.Scalar;
}

export function computeLosses(
  batch: Batch,
  motionTeacher: MotionTeacher,
  denoisingTeacher: DenoisingTeacher,
  student: Student,
  lambda1: number,
  lambda2: number,
): LossValues {
  return tf.tidy(() => {
    const fwd = student.forward(batch.xQis, batch.xQisMean);
    const mse = sumSquaredLoss(fwd.output, batch.xTrue);

    const phiTarget = detach(motionTeacher.feature(batch.xMotion));
    const motion = sumSquaredLoss(fwd.motionFeature, phiTarget);

    const varphiTarget = detach(denoisingTeacher.feature(batch.xNoise));
    const noise = sumSquaredLoss(fwd.denoisingFeature, varphiTarget);

    const overall = tf.add(
      mse,
      tf.add(tf.mul(motion, lambda1), tf.mul(noise, lambda2)),
    ) as tf.Scalar;
    return { mse, motion, noise, overall };
  });
}

export interface LossNumbers {
  mse: number;
  motion: number;
  noise: number;
  overall: number;
}

export function lossNumbers(values: LossValues): LossNumbers {
  const [mse, motion, noise, overall] = [
    values.mse, values.motion, values.noise, values.overall,
  ].map((t) => t.dataSync()[0]);
  return { mse, motion, noise, overall };
}
