/**
 * Round-trip checks against the analysis package, consumed strictly through
 * its command-line interface (the documented external surface).
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, describe, expect, it } from "vitest";

import { convert, findNativeOutputs } from "../src/convert.js";
import { runPipeline, PipelineError } from "../src/runner.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const NATIVE = path.join(here, "..", "fixtures", "native");

const tmpDirs: string[] = [];

function tmpDir(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "adapter-int-"));
  tmpDirs.push(dir);
  return dir;
}

afterEach(() => {
  while (tmpDirs.length > 0) {
    fs.rmSync(tmpDirs.pop()!, { recursive: true, force: true });
  }
});

function charspace(args: string[]) {
  return spawnSync("charspace", args, { encoding: "utf-8" });
}

const charspaceAvailable = charspace(["--help"]).status === 0;

describe.skipIf(!charspaceAvailable)("primary-package round trip", () => {
  it("converted bundle passes the consumer's parser and yields a registry", () => {
    const bundleDir = path.join(tmpDir(), "excerpt.bundle");
    convert(findNativeOutputs(NATIVE, "excerpt"), bundleDir);
    const registryPath = path.join(tmpDir(), "registry.json");
    const result = charspace([
      "registry", "--bundle", bundleDir, "--out", registryPath,
    ]);
    expect(result.status, result.stderr).toBe(0);
    const registry = JSON.parse(fs.readFileSync(registryPath, "utf-8"));
    expect(registry.length).toBeGreaterThan(0);
    const names = registry.map((c: { canonical_name: string }) => c.canonical_name);
    expect(names).toContain("Mr. Bennet");
  });

  it("a corrupted bundle is rejected by the consumer", () => {
    const bundleDir = path.join(tmpDir(), "excerpt.bundle");
    convert(findNativeOutputs(NATIVE, "excerpt"), bundleDir);
    fs.appendFileSync(path.join(bundleDir, "quotes.tsv"), "9\t27\t31\t1\n");
    const result = charspace([
      "registry", "--bundle", bundleDir, "--out", path.join(tmpDir(), "r.json"),
    ]);
    expect(result.status).toBe(1);
  });
});

describe("pipeline runner", () => {
  it("rejects a missing input file", () => {
    expect(() => runPipeline(path.join(tmpDir(), "nope.txt"), tmpDir())).toThrowError(
      PipelineError,
    );
  });

  it("rejects an empty input file", () => {
    const input = path.join(tmpDir(), "empty.txt");
    fs.writeFileSync(input, "");
    expect(() => runPipeline(input, tmpDir())).toThrowError(/empty/);
  });

  it("surfaces an actionable message when the pipeline is not installed", () => {
    const input = path.join(tmpDir(), "novel.txt");
    fs.writeFileSync(input, "Some text.\n");
    const stub = path.join(tmpDir(), "python-stub.sh");
    fs.writeFileSync(
      stub,
      "#!/bin/sh\necho 'booknlp is not installed; install it with: pip install booknlp' >&2\nexit 3\n",
    );
    fs.chmodSync(stub, 0o755);
    expect(() =>
      runPipeline(input, tmpDir(), undefined, { python: stub }),
    ).toThrowError(/pip install booknlp/);
  });
});

const booknlpAvailable =
  spawnSync("python3", ["-c", "import booknlp"], { encoding: "utf-8" }).status === 0;

describe.skipIf(!booknlpAvailable)("live pipeline smoke", () => {
  it("produces all four native files on a tiny excerpt", () => {
    const input = path.join(tmpDir(), "tiny.txt");
    fs.writeFileSync(
      input,
      'It is a truth universally acknowledged, that a single man in possession ' +
        'of a good fortune, must be in want of a wife. "My dear Mr. Bennet," ' +
        'said his lady to him one day, "have you heard that Netherfield Park ' +
        'is let at last?" Mr. Bennet replied that he had not.\n',
    );
    const work = tmpDir();
    const native = runPipeline(input, work, "tiny");
    for (const file of Object.values(native)) {
      expect(fs.existsSync(file)).toBe(true);
    }
  }, 600000);
});

// Full-novel end-to-end ordering check (protagonist first by co-occurrence
// PageRank, her counterpart first by discussion in-strength).  Needs a real
// pipeline run over the whole novel, so it only executes when a converted
// bundle is supplied via CHARSPACE_PNP_BUNDLE.
const pnpBundle = process.env.CHARSPACE_PNP_BUNDLE;

describe.skipIf(!pnpBundle || !charspaceAvailable)("full-novel ordering", () => {
  it("ranks the expected leads on the converted novel bundle", () => {
    const out = tmpDir();
    const registryPath = path.join(out, "registry.json");
    expect(
      charspace(["registry", "--bundle", pnpBundle!, "--out", registryPath]).status,
    ).toBe(0);
    const cooc = path.join(out, "cooc.graphml");
    expect(
      charspace([
        "graph", "--bundle", pnpBundle!, "--registry", registryPath,
        "--kind", "cooccurrence", "--out", cooc,
      ]).status,
    ).toBe(0);
    const dc = path.join(out, "dc.graphml");
    expect(
      charspace([
        "graph", "--bundle", pnpBundle!, "--registry", registryPath,
        "--kind", "discussion", "--out", dc,
      ]).status,
    ).toBe(0);
    const coocMetrics = path.join(out, "cooc.json");
    expect(charspace(["metrics", "--graph", cooc, "--out", coocMetrics]).status).toBe(0);
    const dcMetrics = path.join(out, "dc.json");
    expect(charspace(["metrics", "--graph", dc, "--out", dcMetrics]).status).toBe(0);

    const registry = JSON.parse(fs.readFileSync(registryPath, "utf-8"));
    const nameOf = new Map<string, string>(
      registry.map((c: { char_id: number; canonical_name: string }) => [
        String(c.char_id),
        c.canonical_name,
      ]),
    );
    const top = (metricsFile: string, measure: string): string => {
      const payload = JSON.parse(fs.readFileSync(metricsFile, "utf-8"));
      const values: Record<string, number> = payload.per_node[measure];
      const best = Object.entries(values).sort(
        (a, b) => b[1] - a[1] || Number(a[0]) - Number(b[0]),
      )[0][0];
      return nameOf.get(best) ?? best;
    };
    expect(top(coocMetrics, "PAGERANK")).toMatch(/Elizabeth/);
    expect(top(dcMetrics, "IN_STRENGTH")).toMatch(/Darcy/);
  });
});
