import { writeFile } from "node:fs/promises";
import { dirname, join } from "node:path";

import { readCorpus } from "./corpus.js";
import { createEncoder, DEFAULT_MODEL } from "./encoder.js";
import { fileDigest, writeManifest, type ExportManifest } from "./manifest.js";

export { parseCorpusJsonl, readCorpus, type Quote } from "./corpus.js";
export {
    cosineSimilarity,
    createEncoder,
    DEFAULT_MODEL,
    HashEncoder,
    SANITY_PAIRS,
    type Encoder,
} from "./encoder.js";
export { CorpusError, ModelUnavailable } from "./errors.js";
export { fileDigest, type ExportManifest } from "./manifest.js";

export interface ExportOptions {
    corpusPath: string;
    outPath: string;
    model?: string;
    /** where to write manifest.json; defaults next to the output file */
    manifestPath?: string;
}

export interface ExportResult {
    quoteCount: number;
    dimension: number;
    manifest: ExportManifest;
}

/**
 * Read a corpus JSONL, encode every quote text, and write an embeddings
 * JSONL ({"id", "vector"} per line) plus a manifest describing the model
 * and the exact input it saw. One vector per quote, constant dimension.
 */
export async function exportEmbeddings(options: ExportOptions): Promise<ExportResult> {
    const quotes = await readCorpus(options.corpusPath);
    const encoder = await createEncoder(options.model ?? DEFAULT_MODEL);
    const vectors = await encoder.encode(quotes.map((q) => q.text));

    const lines = quotes.map((q, i) =>
        JSON.stringify({ id: q.id, vector: vectors[i] }),
    );
    await writeFile(options.outPath, lines.map((l) => l + "\n").join(""), "utf-8");

    const manifest: ExportManifest = {
        model: encoder.id,
        model_version: encoder.version,
        dimension: encoder.dim,
        corpus_sha256: await fileDigest(options.corpusPath),
        quote_count: quotes.length,
        created: new Date().toISOString(),
    };
    const manifestPath =
        options.manifestPath ?? join(dirname(options.outPath), "manifest.json");
    await writeManifest(manifestPath, manifest);
    return { quoteCount: quotes.length, dimension: encoder.dim, manifest };
}
