/* tslint:disable */
/* eslint-disable */

/**
 * `sqrt(1 - exp(-d))` sampled at `points` values of `d` in `[0, d_max]`.
 */
export function bound_curve(d_max: number, points: number): Float64Array;

/**
 * Full and restricted reach-avoid values of a policy file with its bound check.
 */
export function evaluate_policy(config: string, policy: string): string;

/**
 * Solves stage 1 and returns `{v_star, rows, cols, agents: [{name, occupancy: [[label, value]]}]}`.
 */
export function reach_value(config: string): string;

/**
 * Bundled scenario config as JSON text.
 */
export function scenario_config(name: string): string;

/**
 * Names of the bundled scenarios.
 */
export function scenario_names(): string[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bound_curve: (a: number, b: number) => [number, number];
    readonly evaluate_policy: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly reach_value: (a: number, b: number) => [number, number, number, number];
    readonly scenario_config: (a: number, b: number) => [number, number, number, number];
    readonly scenario_names: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
