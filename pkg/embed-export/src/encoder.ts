import { createHash } from "node:crypto";

import { ModelUnavailable } from "./errors.js";

export interface Encoder {
    /** model identifier, e.g. "hash-512" */
    id: string;
    version: string;
    dim: number;
    encode(texts: string[]): Promise<number[][]>;
}

export const DEFAULT_MODEL = "hash-512";

function tokenize(text: string): string[] {
    return text.toLowerCase().match(/[\p{L}\p{N}]+/gu) ?? [];
}

/**
 * Deterministic signed-hash encoder over unigrams and bigrams.
 *
 * A pure function of the text: each n-gram's SHA-256 picks a dimension
 * and a sign, and counts accumulate unnormalised. No downloads, no
 * randomness, so identical texts always produce identical vectors.
 */
export class HashEncoder implements Encoder {
    readonly id = "hash-512";
    readonly version = "1";
    readonly dim: number;

    constructor(dim = 512) {
        this.dim = dim;
    }

    encodeOne(text: string): number[] {
        const tokens = tokenize(text);
        const grams = [...tokens];
        for (let i = 0; i + 1 < tokens.length; i++) {
            grams.push(`${tokens[i]}${tokens[i + 1]}`);
        }
        const vector = new Array<number>(this.dim).fill(0);
        for (const gram of grams) {
            const digest = createHash("sha256").update(gram, "utf-8").digest();
            const index = digest.readUInt32BE(0) % this.dim;
            const sign = digest[4] & 1 ? 1 : -1;
            vector[index] += sign;
        }
        return vector;
    }

    async encode(texts: string[]): Promise<number[][]> {
        return texts.map((t) => this.encodeOne(t));
    }
}

/**
 * Universal-sentence-encoder adapter. The runtime package and its model
 * weights download on first use; without network access to the model
 * host this reports ModelUnavailable.
 */
class UseEncoder implements Encoder {
    readonly id = "use";
    readonly version: string;
    readonly dim = 512;
    private model: { embed(texts: string[]): Promise<{ array(): Promise<number[][]> }> };

    private constructor(model: UseEncoder["model"], version: string) {
        this.model = model;
        this.version = version;
    }

    static async load(): Promise<UseEncoder> {
        let use;
        try {
            await import("@tensorflow/tfjs" as string);
            use = await import("@tensorflow-models/universal-sentence-encoder" as string);
        } catch (err) {
            throw new ModelUnavailable(
                `universal-sentence-encoder runtime is not installed: ${err}`,
            );
        }
        try {
            const model = await use.load();
            return new UseEncoder(model, "tfjs");
        } catch (err) {
            throw new ModelUnavailable(
                `universal-sentence-encoder weights could not be fetched: ${err}`,
            );
        }
    }

    async encode(texts: string[]): Promise<number[][]> {
        if (texts.length === 0) return [];
        const tensor = await this.model.embed(texts);
        return tensor.array();
    }
}

export async function createEncoder(modelId: string = DEFAULT_MODEL): Promise<Encoder> {
    if (modelId === "hash-512") return new HashEncoder();
    if (modelId === "use") return UseEncoder.load();
    throw new ModelUnavailable(`unknown model id ${modelId}`);
}

export function cosineSimilarity(a: number[], b: number[]): number {
    if (a.length !== b.length) {
        throw new Error("vector size mismatch");
    }
    let dot = 0;
    let normA = 0;
    let normB = 0;
    for (let i = 0; i < a.length; i++) {
        dot += a[i] * b[i];
        normA += a[i] * a[i];
        normB += b[i] * b[i];
    }
    return dot / (Math.sqrt(normA) * Math.sqrt(normB));
}

/**
 * Built-in sanity set: each entry pairs a sentence with a paraphrase and
 * an unrelated sentence. A usable encoder scores the paraphrase higher.
 */
export const SANITY_PAIRS: { text: string; paraphrase: string; unrelated: string }[] = [
    {
        text: "the government must protect its citizens",
        paraphrase: "our government should protect all citizens",
        unrelated: "the recipe needs two cups of flour",
    },
    {
        text: "violence is never an acceptable answer",
        paraphrase: "violence is not an acceptable response",
        unrelated: "the train departs from platform nine",
    },
    {
        text: "we will rebuild the local economy",
        paraphrase: "we plan to rebuild our local economy",
        unrelated: "her cat sleeps on the warm windowsill",
    },
    {
        text: "education opens doors for young people",
        paraphrase: "education opens many doors for the young",
        unrelated: "the engine requires fresh oil every year",
    },
    {
        text: "peaceful protest is a democratic right",
        paraphrase: "peaceful protest remains a right in a democracy",
        unrelated: "add the onions and stir for a minute",
    },
    {
        text: "extremist propaganda spreads quickly online",
        paraphrase: "extremist propaganda can spread fast online",
        unrelated: "the harvest was late after the cold spring",
    },
    {
        text: "communities grow stronger when they work together",
        paraphrase: "working together makes communities stronger",
        unrelated: "the telescope needs a clear night sky",
    },
    {
        text: "the attack on the towers shocked the world",
        paraphrase: "the towers attack shocked people around the world",
        unrelated: "please water the plants twice a week",
    },
    {
        text: "freedom of speech carries responsibility",
        paraphrase: "freedom of speech comes with responsibility",
        unrelated: "the bakery sells bread every morning",
    },
    {
        text: "leaders must answer to the people",
        paraphrase: "leaders should answer to their people",
        unrelated: "the river froze solid in january",
    },
];
