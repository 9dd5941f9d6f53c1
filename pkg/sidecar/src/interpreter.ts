/**
 * Interpreter resolution: an environment is addressed by its path prefix,
 * and its interpreter is whatever `bin/python*` that prefix provides.  An
 * empty path means the ambient `python3`, which keeps local testing cheap.
 */

import { accessSync, constants, statSync } from 'node:fs';
import * as path from 'node:path';

function isExecutableFile(candidate: string): boolean {
  try {
    const stats = statSync(candidate);
    if (!stats.isFile()) {
      return false;
    }
    accessSync(candidate, constants.X_OK);
    return true;
  } catch {
    return false;
  }
}

export function resolveInterpreter(envPath: string): string | null {
  if (!envPath) {
    return 'python3';
  }
  if (isExecutableFile(envPath)) {
    return envPath;
  }
  const candidates = [
    path.join(envPath, 'bin', 'python3'),
    path.join(envPath, 'bin', 'python'),
    path.join(envPath, 'Scripts', 'python.exe'),
  ];
  for (const candidate of candidates) {
    if (isExecutableFile(candidate)) {
      return candidate;
    }
  }
  return null;
}
