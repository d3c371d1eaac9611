// Job polling with backoff.

import type { ApiClient, JobInfo } from "./api.js";

export interface PollOptions {
  initialDelayMs?: number;
  maxDelayMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: JobInfo) => void;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollJob(
  api: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<JobInfo> {
  const {
    initialDelayMs = 100,
    maxDelayMs = 2000,
    timeoutMs = 120_000,
    onUpdate,
    sleep = defaultSleep,
  } = options;
  const startedAt = Date.now();
  let delay = initialDelayMs;
  for (;;) {
    const job = await api.job(jobId);
    onUpdate?.(job);
    if (job.phase === "done") return job;
    if (job.phase === "failed") throw new Error(job.error ?? `job ${jobId} failed`);
    if (Date.now() - startedAt > timeoutMs) throw new Error(`job ${jobId} timed out`);
    await sleep(delay);
    delay = Math.min(delay * 2, maxDelayMs);
  }
}
