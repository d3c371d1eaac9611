import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf-8")) as T;
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

/** A fetch double that serves canned responses and records every request. */
export function mockFetch(
  routes: Record<string, unknown | ((req: RecordedRequest) => unknown)>,
): { fetch: FetchLike; requests: RecordedRequest[] } {
  const requests: RecordedRequest[] = [];
  const impl: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const req = { method, path: input, body };
    requests.push(req);
    const key = `${method} ${input}`;
    if (!(key in routes)) {
      return new Response(JSON.stringify({ error: `no route ${key}` }), { status: 404 });
    }
    const handler = routes[key];
    const payload = typeof handler === "function" ? (handler as (r: RecordedRequest) => unknown)(req) : handler;
    return new Response(JSON.stringify(payload), { status: 200 });
  };
  return { fetch: impl, requests };
}
