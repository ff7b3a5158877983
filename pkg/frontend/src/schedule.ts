/**
 * Semi-annealed weighting of the two feature-transfer losses: lambda1 and
 * lambda2 start at their initial values, decay by a fixed factor once
 * every update interval, and are exactly 0 from the cutoff epoch onward
 * (from which point the objective is the plain reconstruction MSE).
 */

export interface ScheduleSpec {
  totalEpochs: number;
  updateInterval: number;
  lambda1Init: number;
  lambda2Init: number;
  decay: number;
  cutoffEpoch: number;
}

export function defaultSchedule(totalEpochs = 200): ScheduleSpec {
  return {
    totalEpochs,
    updateInterval: 25,
    lambda1Init: 1.0,
    lambda2Init: 1.0,
    decay: 0.5,
    cutoffEpoch: 100,
  };
}

export function validateSchedule(s: ScheduleSpec): void {
  if (s.totalEpochs < 1) throw new Error('totalEpochs must be >= 1');
  if (s.updateInterval < 1) throw new Error('updateInterval must be >= 1');
  if (s.lambda1Init < 0 || s.lambda2Init < 0) {
    throw new Error('lambda initial values must be nonnegative');
  }
  if (!(s.decay > 0 && s.decay <= 1)) {
    throw new Error('decay must lie in (0, 1]');
  }
  if (s.cutoffEpoch < 0) throw new Error('cutoffEpoch must be >= 0');
}

export function lambdasAt(s: ScheduleSpec, epoch: number): [number, number] {
  if (epoch >= s.cutoffEpoch) return [0, 0];
  const steps = Math.floor(epoch / s.updateInterval);
  const factor = Math.pow(s.decay, steps);
  return [s.lambda1Init * factor, s.lambda2Init * factor];
}
