/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_profile_free: (a: number, b: number) => void;
export const builtin_scheme_text: (a: number, b: number) => [number, number, number, number];
export const builtin_schemes: () => [number, number];
export const check_tableau: (a: number, b: number) => [number, number];
export const heat_errors: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const profile_distances: (a: number) => [number, number];
export const profile_exact: (a: number, b: number) => [number, number];
export const profile_numeric: (a: number, b: number) => [number, number];
export const profile_steps: (a: number) => number;
export const profile_x: (a: number) => [number, number];
export const r13_channel: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
