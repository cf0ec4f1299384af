import { createHash } from "node:crypto";
import { readFile, writeFile } from "node:fs/promises";

export interface ExportManifest {
    model: string;
    model_version: string;
    dimension: number;
    corpus_sha256: string;
    quote_count: number;
    created: string;
}

export async function fileDigest(path: string): Promise<string> {
    const data = await readFile(path);
    return createHash("sha256").update(data).digest("hex");
}

export async function writeManifest(path: string, manifest: ExportManifest): Promise<void> {
    await writeFile(path, JSON.stringify(manifest, null, 2) + "\n", "utf-8");
}
