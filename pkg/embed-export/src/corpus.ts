import { readFile } from "node:fs/promises";

import { CorpusError } from "./errors.js";

export interface Quote {
    id: string;
    author: string;
    text: string;
    date: string;
}

/**
 * Parse a corpus JSONL document (one quote object per line).
 * Only the fields the exporter needs are validated; extra fields pass
 * through untouched.
 */
export function parseCorpusJsonl(content: string): Quote[] {
    const quotes: Quote[] = [];
    const seen = new Set<string>();
    const lines = content.split("\n");
    for (let i = 0; i < lines.length; i++) {
        const line = lines[i].trim();
        if (!line) continue;
        let record: unknown;
        try {
            record = JSON.parse(line);
        } catch (err) {
            throw new CorpusError(`line ${i + 1}: invalid JSON (${err})`);
        }
        const rec = record as Record<string, unknown>;
        for (const key of ["id", "author", "text", "date"]) {
            if (typeof rec[key] !== "string") {
                throw new CorpusError(`line ${i + 1}: missing string field ${key}`);
            }
        }
        const id = rec.id as string;
        if (seen.has(id)) {
            throw new CorpusError(`line ${i + 1}: duplicate quote id ${id}`);
        }
        seen.add(id);
        quotes.push({
            id,
            author: rec.author as string,
            text: rec.text as string,
            date: rec.date as string,
        });
    }
    return quotes;
}

export async function readCorpus(path: string): Promise<Quote[]> {
    let content: string;
    try {
        content = await readFile(path, "utf-8");
    } catch (err) {
        throw new CorpusError(`cannot read corpus ${path}: ${err}`);
    }
    return parseCorpusJsonl(content);
}
