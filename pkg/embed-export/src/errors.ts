export class ModelUnavailable extends Error {
    constructor(message: string) {
        super(message);
        this.name = "ModelUnavailable";
    }
}

export class CorpusError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "CorpusError";
    }
}
