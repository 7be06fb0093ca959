import type { FetchLike } from "../src/api.js";

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function abortError(): Error {
  const err = new Error("aborted");
  err.name = "AbortError";
  return err;
}

export interface FetchStub {
  fetchFn: FetchLike;
  calls: string[];
}

/** Records every requested URL and answers from the handler. */
export function stubFetch(handler: (url: string) => Response | Promise<Response>): FetchStub {
  const calls: string[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push(url);
    if (init?.signal?.aborted) throw abortError();
    return handler(url);
  };
  return { fetchFn, calls };
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}
