/** Trailing-edge debouncer over an injectable timer. */

export interface Scheduler {
  schedule(fn: () => void, delayMs: number): number;
  cancel(id: number): void;
}

export const realScheduler: Scheduler = {
  schedule: (fn, delayMs) => setTimeout(fn, delayMs) as unknown as number,
  cancel: (id) => clearTimeout(id),
};

export interface Debouncer {
  /** Replace any pending call with this one; it fires after the delay. */
  run(fn: () => void): void;
  /** Drop the pending call, if any. */
  cancel(): void;
}

export function createDebouncer(scheduler: Scheduler, delayMs: number): Debouncer {
  let pending: number | null = null;
  return {
    run(fn) {
      if (pending !== null) scheduler.cancel(pending);
      pending = scheduler.schedule(() => {
        pending = null;
        fn();
      }, delayMs);
    },
    cancel() {
      if (pending !== null) {
        scheduler.cancel(pending);
        pending = null;
      }
    },
  };
}
