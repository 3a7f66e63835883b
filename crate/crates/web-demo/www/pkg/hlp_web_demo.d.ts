/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Mean test accuracy over the demo splits for each graph rank in `ks`.
     */
    accuracy_curve(ks: Uint32Array, k2: number, epochs: number): Float64Array;
    baseline_accuracy(epochs: number): number;
    /**
     * Fraction of edges joining same-class nodes.
     */
    homophily(): number;
    /**
     * Class labels in heatmap order.
     */
    labels(): Uint32Array;
    n(): number;
    /**
     * Share of off-diagonal entries of the rank-k graph that are negative.
     */
    negative_fraction(k: number): number;
    constructor(n: number, classes: number, homophily: number, seed: number);
    reconstruction(k: number): Float64Array;
    /**
     * Singular values, largest first.
     */
    spectrum(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_accuracy_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_baseline_accuracy: (a: number, b: number) => [number, number, number];
    readonly demo_homophily: (a: number) => number;
    readonly demo_labels: (a: number) => [number, number];
    readonly demo_n: (a: number) => number;
    readonly demo_negative_fraction: (a: number, b: number) => [number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly demo_reconstruction: (a: number, b: number) => [number, number, number, number];
    readonly demo_spectrum: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
