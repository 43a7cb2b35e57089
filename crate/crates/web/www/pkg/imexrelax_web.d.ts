/* tslint:disable */
/* eslint-disable */

/**
 * Final channel profile next to the analytic steady state.
 */
export class Profile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Max-norm distance to the steady state after every step.
     */
    distances(): Float64Array;
    exact(k: number): Float64Array;
    /**
     * Component 0, 1 or 2 (`u~`, `v`, `w~`).
     */
    numeric(k: number): Float64Array;
    steps(): number;
    x(): Float64Array;
}

/**
 * Registry text of one builtin scheme, for editing on the page.
 */
export function builtin_scheme_text(name: string): string;

/**
 * Names of the schemes shipped with the library.
 */
export function builtin_schemes(): string[];

/**
 * Structure, class and order report for a scheme block.
 */
export function check_tableau(text: string): string;

/**
 * Max error of `u` against `exp(-t) sin x` after each step of the 2x2
 * diffusive system at `dt = c dx`, flattened as `[t0, e0, t1, e1, ...]`.
 * Stops early once the solution leaves `1e6`.
 */
export function heat_errors(n: number, eps: number, c: number, t_end: number, penalized: boolean): Float64Array;

/**
 * Runs the R13 channel with slip walls from the printed initial data.
 */
export function r13_channel(n: number, eps: number, g: number, alpha: number, beta: number, c: number, t_end: number): Profile;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_profile_free: (a: number, b: number) => void;
    readonly builtin_scheme_text: (a: number, b: number) => [number, number, number, number];
    readonly builtin_schemes: () => [number, number];
    readonly check_tableau: (a: number, b: number) => [number, number];
    readonly heat_errors: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly profile_distances: (a: number) => [number, number];
    readonly profile_exact: (a: number, b: number) => [number, number];
    readonly profile_numeric: (a: number, b: number) => [number, number];
    readonly profile_steps: (a: number) => number;
    readonly profile_x: (a: number) => [number, number];
    readonly r13_channel: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
