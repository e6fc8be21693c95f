#!/usr/bin/env node
/**
 * adapter CLI.
 *
 *   adapter run --in novel.txt --out bundle_dir/ [--workdir native/]
 *       run the pipeline, then convert to the canonical bundle
 *   adapter convert --native dir/ --id book --out bundle_dir/
 *       convert existing native outputs only
 *
 * Exit codes: 0 success, 1 domain errors, 2 usage errors.
 */

import * as path from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { convert, ConversionError, findNativeOutputs } from "./convert.js";
import { PipelineError, runPipeline } from "./runner.js";

async function main(): Promise<number> {
  let usageError = false;
  const parser = yargs(hideBin(process.argv))
    .scriptName("adapter")
    .command(
      "run",
      "run the pipeline on a novel and emit the canonical bundle",
      (y) =>
        y
          .option("in", { type: "string", demandOption: true, describe: "novel .txt" })
          .option("out", { type: "string", demandOption: true, describe: "bundle dir" })
          .option("workdir", { type: "string", describe: "native output dir" })
          .option("id", { type: "string", describe: "book id (default: file stem)" }),
    )
    .command(
      "convert",
      "convert existing native outputs into the canonical bundle",
      (y) =>
        y
          .option("native", { type: "string", demandOption: true })
          .option("id", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true }),
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      if (err) throw err;
      console.error(msg);
      usageError = true;
    })
    .help();

  const argv = await parser.parse();
  if (usageError) return 2;

  try {
    const command = String(argv._[0]);
    if (command === "run") {
      const input = String(argv.in);
      const out = String(argv.out);
      const id = argv.id ? String(argv.id) : path.basename(input).replace(/\.[^.]+$/, "");
      const workdir = argv.workdir ? String(argv.workdir) : path.join(out, "native");
      const native = runPipeline(input, workdir, id);
      convert(native, out);
      console.log(`wrote canonical bundle to ${out}`);
      return 0;
    }
    if (command === "convert") {
      const native = findNativeOutputs(String(argv.native), String(argv.id));
      convert(native, String(argv.out));
      console.log(`wrote canonical bundle to ${argv.out}`);
      return 0;
    }
    console.error(`unknown command: ${command}`);
    return 2;
  } catch (err) {
    if (err instanceof ConversionError || err instanceof PipelineError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

main().then((code) => {
  process.exitCode = code;
});
