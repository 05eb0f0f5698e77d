#pragma once

namespace alternator {

// Keeps large, short-lived tensors (stacked batches, tape values) on the heap
// instead of fresh mmap/munmap pairs. Training spends a third of its time in
// page faults otherwise. No-op outside glibc.
void tune_allocator();

}  // namespace alternator
