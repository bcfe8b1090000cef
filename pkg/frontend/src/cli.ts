#!/usr/bin/env node
/**
 * EMB1 embedding exporter.
 *
 *   export-text       mention + cross-encoded pair vectors from a corpus
 *   export-sentpairs  2H sentence-context records for difficulty cosines
 *   export-vision     mention + paired-image vectors from a PNG manifest
 *
 * Exit codes: 0 success, 1 data error, 2 usage error. Output is staged
 * to a temp file and renamed, so failures never leave partial files.
 */

import { renameSync, writeFileSync } from "node:fs";

import { encodeEmb1, type EmbRecord } from "./emb1.js";
import { exportSentencePairs, exportText, exportVision } from "./export.js";

interface Flags {
  [key: string]: string | boolean;
}

const USAGE = `usage: embex <command> [flags]

commands:
  export-text       --corpus FILE [--pairs FILE] --out FILE
                    [--encoder hash] [--dim N] [--max-tokens N] [--deterministic]
  export-sentpairs  --corpus FILE [--pairs FILE] --out FILE
                    [--encoder hash] [--dim N] [--max-tokens N] [--deterministic]
  export-vision     --manifest FILE [--pairs FILE] --out FILE
                    [--encoder hash] [--dim N] [--image-size N] [--deterministic]
`;

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument ${JSON.stringify(arg)}`);
    }
    const name = arg.slice(2);
    if (name === "deterministic") {
      flags[name] = true;
    } else {
      const value = argv[i + 1];
      if (value === undefined || value.startsWith("--")) {
        throw new UsageError(`flag --${name} needs a value`);
      }
      flags[name] = value;
      i++;
    }
  }
  return flags;
}

class UsageError extends Error {}

function requireFlag(flags: Flags, name: string): string {
  const value = flags[name];
  if (typeof value !== "string") {
    throw new UsageError(`missing required flag --${name}`);
  }
  return value;
}

function intFlag(flags: Flags, name: string, fallback: number): number {
  const value = flags[name];
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isInteger(parsed) || parsed <= 0) {
    throw new UsageError(`--${name} must be a positive integer`);
  }
  return parsed;
}

function writeStaged(path: string, bytes: Uint8Array): void {
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, bytes);
  renameSync(tmp, path);
}

function run(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command || command === "--help" || command === "-h") {
    process.stdout.write(USAGE);
    return command ? 0 : 2;
  }
  const flags = parseFlags(rest);
  const encoder = typeof flags.encoder === "string" ? flags.encoder : "hash";
  const dim = intFlag(flags, "dim", 768);
  const out = requireFlag(flags, "out");
  // all supported encoders are deterministic; the flag is accepted for
  // config compatibility and documents intent
  void flags.deterministic;

  let modality: "text" | "vision" = "text";
  let encoderName = encoder;
  let fileDim = dim;
  let records: EmbRecord[];
  if (command === "export-text") {
    records = exportText({
      corpusPath: requireFlag(flags, "corpus"),
      pairsPath: typeof flags.pairs === "string" ? flags.pairs : undefined,
      encoder,
      dim,
      maxTokens: intFlag(flags, "max-tokens", 77),
    });
  } else if (command === "export-sentpairs") {
    records = exportSentencePairs({
      corpusPath: requireFlag(flags, "corpus"),
      pairsPath: typeof flags.pairs === "string" ? flags.pairs : undefined,
      encoder,
      dim,
      maxTokens: intFlag(flags, "max-tokens", 77),
    });
    encoderName = `${encoder}-ctx`;
    fileDim = 2 * dim;
  } else if (command === "export-vision") {
    records = exportVision({
      manifestPath: requireFlag(flags, "manifest"),
      pairsPath: typeof flags.pairs === "string" ? flags.pairs : undefined,
      encoder,
      dim,
      imageSize: intFlag(flags, "image-size", 224),
    });
    modality = "vision";
  } else {
    throw new UsageError(`unknown command ${JSON.stringify(command)}`);
  }

  writeStaged(out, encodeEmb1(modality, encoderName, fileDim, records));
  const mentions = records.filter((r) => r.kind === "mention").length;
  process.stdout.write(
    `wrote ${mentions} mention and ${records.length - mentions} pair records to ${out}\n`,
  );
  return 0;
}

try {
  process.exit(run(process.argv.slice(2)));
} catch (exc) {
  if (exc instanceof UsageError) {
    process.stderr.write(`usage error: ${exc.message}\n${USAGE}`);
    process.exit(2);
  }
  process.stderr.write(`error: ${(exc as Error).message}\n`);
  process.exit(1);
}
