/**
 * Child-process bridge to the augmentation CLI. The binding talks to the
 * pipeline exclusively through its public surface: the `drcpo` command and
 * the velodyne/label file formats.
 */

import { spawnSync } from "node:child_process";

/** Resolve the CLI command; DRCPO_BIN may hold e.g. "python3 -m drcpo.cli". */
export function cliCommand(): string[] {
  const bin = process.env.DRCPO_BIN ?? "drcpo";
  return bin.split(/\s+/).filter(Boolean);
}

export function runCli(args: string[]): string {
  const [cmd, ...prefix] = cliCommand();
  const result = spawnSync(cmd, [...prefix, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new Error(`failed to launch ${cmd}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    throw new Error(
      `drcpo ${args[0]} exited with ${result.status}:\n${result.stderr || result.stdout}`,
    );
  }
  return result.stdout;
}
