/**
 * Request handling: resolve the environment's interpreter, spawn one fresh
 * process per request, feed it the request on stdin, and relay its single
 * JSON response.  No state survives between requests.
 */

import { spawn } from 'node:child_process';
import { PYTHON_DRIVER } from './driver.js';
import { resolveInterpreter } from './interpreter.js';
import {
  ReflectRequest,
  ReflectRequestSchema,
  SidecarResponse,
} from './protocol.js';

export class ProtocolError extends Error {}

export function parseRequest(raw: string): ReflectRequest {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch (exc) {
    throw new ProtocolError(`request is not JSON: ${(exc as Error).message}`);
  }
  const result = ReflectRequestSchema.safeParse(parsed);
  if (!result.success) {
    throw new ProtocolError(`request violates schema: ${result.error.message}`);
  }
  return result.data;
}

export async function handleRequest(request: ReflectRequest): Promise<SidecarResponse> {
  const interpreter = resolveInterpreter(request.env_path);
  if (interpreter === null) {
    return {
      error: {
        type: 'EnvironmentNotFound',
        message: `no interpreter under ${request.env_path}`,
      },
    };
  }

  return new Promise((resolve) => {
    const child = spawn(interpreter, ['-c', PYTHON_DRIVER], {
      stdio: ['pipe', 'pipe', 'pipe'],
    });
    let stdout = '';
    let stderr = '';
    let settled = false;

    const timer = setTimeout(() => {
      if (settled) {
        return;
      }
      settled = true;
      child.kill('SIGKILL');
      resolve({
        error: {
          type: 'Timeout',
          message: `interpreter exceeded ${request.timeout_seconds}s`,
        },
      });
    }, request.timeout_seconds * 1000);

    child.stdout.setEncoding('utf8');
    child.stderr.setEncoding('utf8');
    child.stdout.on('data', (chunk: string) => {
      stdout += chunk;
    });
    child.stderr.on('data', (chunk: string) => {
      stderr += chunk;
    });
    child.on('error', (exc) => {
      if (settled) {
        return;
      }
      settled = true;
      clearTimeout(timer);
      resolve({
        error: { type: 'EnvironmentNotFound', message: String(exc) },
      });
    });
    child.on('close', (code) => {
      if (settled) {
        return;
      }
      settled = true;
      clearTimeout(timer);
      const lines = stdout.trim().split('\n');
      const last = lines[lines.length - 1];
      if (code !== 0 || !last) {
        resolve({
          error: {
            type: 'EnvironmentNotFound',
            message: `interpreter exited ${code}: ${stderr.slice(0, 500)}`,
          },
        });
        return;
      }
      try {
        resolve(JSON.parse(last) as SidecarResponse);
      } catch {
        resolve({
          error: {
            type: 'EnvironmentNotFound',
            message: `interpreter produced no JSON: ${last.slice(0, 200)}`,
          },
        });
      }
    });

    child.stdin.write(JSON.stringify(request));
    child.stdin.end();
  });
}
