/* tslint:disable */
/* eslint-disable */

/**
 * Truth table, class representative, degrees and the query lower bounds
 * they imply.
 */
export function describe_function(n: number, id: number): string;

/**
 * Minimum worst-case error with `t` queries under `class`, with the
 * success probability of the optimal strategy on every input and the
 * polynomial it computes.
 */
export function solve_function(n: number, id: number, t: number, _class: string, tol: number): string;

/**
 * The quantum switch against its fixed-order image: with the same unitary
 * in both slots the actions coincide, with different ones they need not.
 */
export function switch_deviation(seed: number, trials: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly describe_function: (a: number, b: number) => [number, number, number, number];
    readonly solve_function: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly switch_deviation: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
