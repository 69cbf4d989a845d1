// Debounced dispatch with cancelation of the in-flight request: each new
// call aborts any pending timer and any request started earlier.

export interface Debouncer<T> {
  call(arg: T): void;
  cancel(): void;
}

export function createDebouncer<T>(
  delayMs: number,
  run: (arg: T, signal: AbortSignal) => void,
): Debouncer<T> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let controller: AbortController | null = null;

  return {
    call(arg: T) {
      if (timer !== null) clearTimeout(timer);
      timer = setTimeout(() => {
        timer = null;
        controller?.abort();
        controller = new AbortController();
        run(arg, controller.signal);
      }, delayMs);
    },
    cancel() {
      if (timer !== null) clearTimeout(timer);
      timer = null;
      controller?.abort();
      controller = null;
    },
  };
}
