/**
 * Thin subprocess wrapper around the BookNLP pipeline: runs the
 * entity,quote,supersense,event,coref packages on one novel and reports
 * where the native output files landed.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

import { findNativeOutputs, NativeOutputSet } from "./convert.js";

export class PipelineError extends Error {}

const DRIVER = `
import sys
try:
    from booknlp.booknlp import BookNLP
except ModuleNotFoundError:
    sys.stderr.write(
        "booknlp is not installed; install it with: pip install booknlp\\n")
    sys.exit(3)

input_file, output_dir, book_id = sys.argv[1:4]
model_params = {"pipeline": "entity,quote,supersense,event,coref", "model": "big"}
BookNLP("en", model_params).process(input_file, output_dir, book_id)
`;

export interface RunOptions {
  /** Python interpreter; ADAPTER_PYTHON overrides, default python3. */
  python?: string;
}

export function runPipeline(
  novelTxt: string,
  workDir: string,
  bookId?: string,
  options: RunOptions = {},
): NativeOutputSet {
  if (!fs.existsSync(novelTxt)) {
    throw new PipelineError(`input novel not found: ${novelTxt}`);
  }
  if (fs.statSync(novelTxt).size === 0) {
    throw new PipelineError(`input novel is empty: ${novelTxt}`);
  }
  const id = bookId ?? path.basename(novelTxt).replace(/\.[^.]+$/, "");
  fs.mkdirSync(workDir, { recursive: true });
  const python = options.python ?? process.env.ADAPTER_PYTHON ?? "python3";
  const result = spawnSync(python, ["-c", DRIVER, novelTxt, workDir, id], {
    encoding: "utf-8",
  });
  if (result.error) {
    throw new PipelineError(`could not launch ${python}: ${result.error.message}`);
  }
  if (result.status === 3) {
    throw new PipelineError(result.stderr.trim());
  }
  if (result.status !== 0) {
    throw new PipelineError(
      `pipeline failed with exit ${result.status}:\n${result.stderr}`,
    );
  }
  // Reruns overwrite in place; the pipeline writes deterministic file names.
  return findNativeOutputs(workDir, id);
}
