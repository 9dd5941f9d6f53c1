/**
 * Wire protocol: one JSON request on stdin, one JSON response on stdout,
 * UTF-8, newline-terminated.  A non-zero process exit means the request
 * itself was malformed; every in-band failure comes back as an error
 * response with exit code zero.
 */

import { z } from 'zod';

export const ReflectRequestSchema = z
  .object({
    env_path: z.string().default(''),
    module_path: z.string().default(''),
    attribute_chain: z.string().default(''),
    mode: z.enum(['signature', 'execute']),
    snippet: z.string().optional(),
    timeout_seconds: z.number().positive().default(30),
  })
  .refine((r) => r.mode !== 'execute' || r.snippet !== undefined, {
    message: 'execute mode requires a snippet',
  });

export type ReflectRequest = z.infer<typeof ReflectRequestSchema>;

/** Mirrors the checker's signature exchange format exactly. */
export const SignatureParamSchema = z.object({
  name: z.string(),
  kind: z.enum(['positional', 'keyword_only', 'var_positional', 'var_keyword']),
  index: z.number().int().nonnegative(),
  has_default: z.boolean(),
  default: z.string().nullable(),
  annotation: z.string().nullable(),
});

export const SignatureResponseSchema = z.object({
  qualified_name: z.string(),
  version: z.string(),
  origin: z.literal('reflected'),
  params: z.array(SignatureParamSchema),
});

export type SignatureResponse = z.infer<typeof SignatureResponseSchema>;

export type ErrorKind =
  | 'NoSignature'
  | 'ImportError'
  | 'AttributeError'
  | 'Timeout'
  | 'EnvironmentNotFound';

export interface ErrorResponse {
  error: {
    type: string;
    message: string;
    traceback?: string;
  };
}

export interface ExecuteResponse {
  ok: boolean;
  error?: {
    type: string;
    message: string;
    traceback?: string;
  };
}

export type SidecarResponse = SignatureResponse | ExecuteResponse | ErrorResponse;

export function isErrorResponse(r: SidecarResponse): r is ErrorResponse {
  return typeof r === 'object' && r !== null && 'error' in r && !('ok' in r);
}
