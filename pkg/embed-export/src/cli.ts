#!/usr/bin/env node
import { exit } from "node:process";

import { CorpusError, ModelUnavailable } from "./errors.js";
import { DEFAULT_MODEL } from "./encoder.js";
import { exportEmbeddings } from "./index.js";

function parseArgs(argv: string[]): { corpus: string; model: string; out: string } {
    const args: Record<string, string> = {};
    for (let i = 0; i < argv.length; i += 2) {
        const flag = argv[i];
        const value = argv[i + 1];
        if (!flag.startsWith("--") || value === undefined) {
            throw new Error(`usage: embed-export --corpus <path> [--model <id>] --out <path>`);
        }
        args[flag.slice(2)] = value;
    }
    if (!args.corpus || !args.out) {
        throw new Error(`usage: embed-export --corpus <path> [--model <id>] --out <path>`);
    }
    return { corpus: args.corpus, model: args.model ?? DEFAULT_MODEL, out: args.out };
}

async function main(): Promise<number> {
    let parsed;
    try {
        parsed = parseArgs(process.argv.slice(2));
    } catch (err) {
        console.error((err as Error).message);
        return 2;
    }
    try {
        const result = await exportEmbeddings({
            corpusPath: parsed.corpus,
            model: parsed.model,
            outPath: parsed.out,
        });
        console.log(
            `wrote ${result.quoteCount} vectors of dimension ${result.dimension} to ${parsed.out}`,
        );
        return 0;
    } catch (err) {
        if (err instanceof ModelUnavailable) {
            console.error(`model unavailable: ${err.message}`);
            return 4;
        }
        if (err instanceof CorpusError) {
            console.error(`corpus error: ${err.message}`);
            return 3;
        }
        throw err;
    }
}

main().then(exit);
