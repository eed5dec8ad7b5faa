"""Worker-count control via the MAGPSIDO_THREADS environment variable."""
import os


def worker_count(task_count=None):
    """Number of workers to use, capped by MAGPSIDO_THREADS (default 4)."""
    cap = os.environ.get("MAGPSIDO_THREADS", "")
    try:
        cap = int(cap) if cap else 4
    except ValueError:
        cap = 4
    cap = max(1, cap)
    hw = os.cpu_count() or 1
    n = min(cap, hw)
    if task_count is not None:
        n = min(n, max(1, task_count))
    return n
