/** Scoring happens in the dataset tool, not here: predictions are written
 * to a file and `symforge eval` is invoked as a subprocess; its JSON report
 * is the source of truth for accuracy. */

import { spawnSync } from "node:child_process";

export interface EvalReport {
  task: string;
  total: number;
  correct: number;
  accuracy: number;
  verdict_counts: Record<string, number>;
}

export function symforgeEval(
  predPath: string,
  refPath: string,
  task: string,
  modConstant = false,
): EvalReport {
  const args = ["eval", "--pred", predPath, "--ref", refPath, "--task", task];
  if (modConstant) args.push("--mod-constant");
  const attempts: Array<[string, string[]]> = [
    ["symforge", args],
    ["python3", ["-m", "symforge.cli", ...args]],
  ];
  let lastError = "";
  for (const [cmd, argv] of attempts) {
    const result = spawnSync(cmd, argv, { encoding: "utf-8" });
    if (result.error) {
      lastError = String(result.error);
      continue;
    }
    if (result.status !== 0) {
      throw new Error(`symforge eval failed (${result.status}): ${result.stderr}`);
    }
    return JSON.parse(result.stdout) as EvalReport;
  }
  throw new Error(`could not invoke symforge eval: ${lastError}`);
}

export function symforgeGenerate(args: string[]): void {
  const attempts: Array<[string, string[]]> = [
    ["symforge", ["generate", ...args]],
    ["python3", ["-m", "symforge.cli", "generate", ...args]],
  ];
  let lastError = "";
  for (const [cmd, argv] of attempts) {
    const result = spawnSync(cmd, argv, { encoding: "utf-8" });
    if (result.error) {
      lastError = String(result.error);
      continue;
    }
    if (result.status !== 0) {
      throw new Error(`symforge generate failed (${result.status}): ${result.stderr}`);
    }
    return;
  }
  throw new Error(`could not invoke symforge generate: ${lastError}`);
}
