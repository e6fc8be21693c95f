/**
 * Convert BookNLP native output files into the canonical annotation bundle
 * (tokens.tsv / entities.tsv / quotes.tsv / supersense.tsv).
 *
 * The conversion is a pure column mapping; no analysis happens here.  It is
 * lossless for the five fields the analysis side consumes (paragraph and
 * sentence structure, mention spans, quote attribution, supersense labels).
 */

import * as fs from "node:fs";
import * as path from "node:path";

export class ConversionError extends Error {}

export interface NativeOutputSet {
  tokens: string;
  entities: string;
  quotes: string;
  supersense: string;
}

/** Locate the four native files `<dir>/<id>.{tokens,entities,quotes,supersense}`. */
export function findNativeOutputs(dir: string, id: string): NativeOutputSet {
  const set: NativeOutputSet = {
    tokens: path.join(dir, `${id}.tokens`),
    entities: path.join(dir, `${id}.entities`),
    quotes: path.join(dir, `${id}.quotes`),
    supersense: path.join(dir, `${id}.supersense`),
  };
  for (const [kind, file] of Object.entries(set)) {
    if (!fs.existsSync(file)) {
      throw new ConversionError(`missing native ${kind} file: ${file}`);
    }
  }
  return set;
}

interface Table {
  header: string[];
  rows: string[][];
}

function readTsv(file: string): Table {
  const text = fs.readFileSync(file, "utf-8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new ConversionError(`native file is empty: ${file}`);
  }
  const header = lines[0].split("\t");
  const rows = lines.slice(1).map((line) => line.split("\t"));
  return { header, rows };
}

function columnIndex(table: Table, name: string, file: string): number {
  const index = table.header.indexOf(name);
  if (index === -1) {
    throw new ConversionError(`native file ${file} is missing column '${name}'`);
  }
  return index;
}

function toInt(value: string, what: string): number {
  const n = Number(value);
  if (!Number.isInteger(n)) {
    throw new ConversionError(`non-integer ${what}: '${value}'`);
  }
  return n;
}

function writeTsv(file: string, header: string[], rows: (string | number)[][]): void {
  const lines = [header.join("\t"), ...rows.map((row) => row.join("\t"))];
  fs.writeFileSync(file, lines.join("\n") + "\n", "utf-8");
}

/**
 * Convert a native output set into a canonical bundle directory.
 * Cross-references are validated before anything is considered done:
 * every span must point at an existing document token and quotes must not
 * overlap, the same checks the consumer runs on parse.
 */
export function convert(native: NativeOutputSet, outDir: string): void {
  fs.mkdirSync(outDir, { recursive: true });

  const tokens = readTsv(native.tokens);
  const tCols = {
    paragraph: columnIndex(tokens, "paragraph_ID", native.tokens),
    sentence: columnIndex(tokens, "sentence_ID", native.tokens),
    token: columnIndex(tokens, "token_ID_within_document", native.tokens),
    word: columnIndex(tokens, "word", native.tokens),
    lemma: columnIndex(tokens, "lemma", native.tokens),
    pos: columnIndex(tokens, "POS_tag", native.tokens),
  };
  const tokenIds = new Set<number>();
  const tokenRows: (string | number)[][] = [];
  const sentenceParagraph = new Map<number, number>();
  let prevToken = -1;
  let prevSentence = -1;
  for (const row of tokens.rows) {
    const tokenId = toInt(row[tCols.token], "token_ID_within_document");
    const sentenceId = toInt(row[tCols.sentence], "sentence_ID");
    const paragraphId = toInt(row[tCols.paragraph], "paragraph_ID");
    if (tokenId <= prevToken) {
      throw new ConversionError(
        `tokens: token_ID_within_document ${tokenId} not strictly increasing`,
      );
    }
    if (sentenceId < prevSentence) {
      throw new ConversionError(`tokens: sentence_ID ${sentenceId} decreases`);
    }
    const seen = sentenceParagraph.get(sentenceId);
    if (seen !== undefined && seen !== paragraphId) {
      throw new ConversionError(
        `tokens: sentence ${sentenceId} spans paragraphs ${seen} and ${paragraphId}`,
      );
    }
    sentenceParagraph.set(sentenceId, paragraphId);
    prevToken = tokenId;
    prevSentence = sentenceId;
    tokenIds.add(tokenId);
    tokenRows.push([
      paragraphId, sentenceId, tokenId, row[tCols.word], row[tCols.lemma], row[tCols.pos],
    ]);
  }

  const checkSpan = (start: number, end: number, where: string): void => {
    if (start > end) {
      throw new ConversionError(`${where}: start_token ${start} > end_token ${end}`);
    }
    for (const id of [start, end]) {
      if (!tokenIds.has(id)) {
        throw new ConversionError(`${where}: dangling token reference ${id}`);
      }
    }
  };

  const entities = readTsv(native.entities);
  const eCols = {
    coref: columnIndex(entities, "COREF", native.entities),
    start: columnIndex(entities, "start_token", native.entities),
    end: columnIndex(entities, "end_token", native.entities),
    prop: columnIndex(entities, "prop", native.entities),
    cat: columnIndex(entities, "cat", native.entities),
    text: columnIndex(entities, "text", native.entities),
  };
  const entityRows: (string | number)[][] = [];
  for (const row of entities.rows) {
    const start = toInt(row[eCols.start], "entity start_token");
    const end = toInt(row[eCols.end], "entity end_token");
    checkSpan(start, end, "entities");
    const prop = row[eCols.prop];
    if (!["PROP", "NOM", "PRON"].includes(prop)) {
      throw new ConversionError(`entities: unknown prop '${prop}'`);
    }
    // Non-person categories pass through untouched; the consumer filters.
    entityRows.push([
      toInt(row[eCols.coref], "COREF"), start, end, prop, row[eCols.cat], row[eCols.text],
    ]);
  }

  const quotes = readTsv(native.quotes);
  const qCols = {
    start: columnIndex(quotes, "quote_start", native.quotes),
    end: columnIndex(quotes, "quote_end", native.quotes),
    charId: columnIndex(quotes, "char_id", native.quotes),
  };
  const quoteSpans: { start: number; end: number; speaker: number }[] = [];
  for (const row of quotes.rows) {
    const start = toInt(row[qCols.start], "quote_start");
    const end = toInt(row[qCols.end], "quote_end");
    checkSpan(start, end, "quotes");
    const speakerRaw = row[qCols.charId];
    const speaker =
      speakerRaw === "" || speakerRaw === "None" ? -1 : toInt(speakerRaw, "char_id");
    quoteSpans.push({ start, end, speaker });
  }
  quoteSpans.sort((a, b) => a.start - b.start);
  for (let i = 1; i < quoteSpans.length; i++) {
    if (quoteSpans[i].start <= quoteSpans[i - 1].end) {
      throw new ConversionError(
        `quotes: spans at tokens ${quoteSpans[i - 1].start} and ${quoteSpans[i].start} overlap`,
      );
    }
  }
  const quoteRows = quoteSpans.map((q, i) => [i, q.start, q.end, q.speaker]);

  const supersense = readTsv(native.supersense);
  const sCols = {
    start: columnIndex(supersense, "start_token", native.supersense),
    end: columnIndex(supersense, "end_token", native.supersense),
    label: columnIndex(supersense, "supersense_category", native.supersense),
  };
  const supersenseRows: (string | number)[][] = [];
  for (const row of supersense.rows) {
    const start = toInt(row[sCols.start], "supersense start_token");
    const end = toInt(row[sCols.end], "supersense end_token");
    checkSpan(start, end, "supersense");
    const label = row[sCols.label];
    if (!/^[a-z]+\.[A-Za-z]+$/.test(label)) {
      throw new ConversionError(`supersense: malformed label '${label}'`);
    }
    supersenseRows.push([start, end, label]);
  }

  writeTsv(
    path.join(outDir, "tokens.tsv"),
    ["paragraph_id", "sentence_id", "token_id", "word", "lemma", "pos"],
    tokenRows,
  );
  writeTsv(
    path.join(outDir, "entities.tsv"),
    ["coref_id", "start_token", "end_token", "prop", "category", "text"],
    entityRows,
  );
  writeTsv(
    path.join(outDir, "quotes.tsv"),
    ["quote_id", "start_token", "end_token", "speaker_coref_id"],
    quoteRows,
  );
  writeTsv(
    path.join(outDir, "supersense.tsv"),
    ["start_token", "end_token", "label"],
    supersenseRows,
  );
}
