/** CSV emitters following the evaluation toolkit's conventions. */

import * as fs from 'fs';

import { StudentEpochRecord } from './train';

export function lossCurveCsv(curve: StudentEpochRecord[]): string {
  const lines = ['epoch,l_mse,l_motion,l_noise,l_overall,lambda1,lambda2'];
  for (const r of curve) {
    lines.push(
      [r.epoch, r.mse, r.motion, r.noise, r.overall, r.lambda1, r.lambda2]
        .join(','),
    );
  }
  return lines.join('\n') + '\n';
}

export interface AblationRow {
  variable: number;
  method: string;
  psnrDb: number;
  n: number;
}

/** Same header and column order as the sweep CSVs: variable,method,psnr_db,mse,n */
export function ablationCsv(rows: AblationRow[]): string {
  const lines = ['variable,method,psnr_db,mse,n'];
  const sorted = rows.slice().sort(
    (a, b) => a.method.localeCompare(b.method) || a.variable - b.variable,
  );
  for (const r of sorted) {
    const mse = Math.pow(10, -r.psnrDb / 10);
    lines.push(`${r.variable},${r.method},${r.psnrDb},${mse},${r.n}`);
  }
  return lines.join('\n') + '\n';
}

export function writeText(text: string, filePath: string): void {
  fs.writeFileSync(filePath, text);
}
