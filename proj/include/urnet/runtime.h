// Copyright 2026 The urnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef URNET_RUNTIME_H_
#define URNET_RUNTIME_H_

namespace urnet {

// Name of the environment variable that overrides the worker count.
inline constexpr const char* kThreadsEnv = "URNET_NUM_THREADS";

// Process-wide allocator tuning for long solver runs. The inner sweeps
// allocate and free multi-megabyte temporaries; with glibc's default trim
// and mmap thresholds most of that turns into page faults. No-op elsewhere.
void configure_allocator();

// Worker count for parallel bench cells: URNET_NUM_THREADS if set to a
// positive integer, else `fallback` (hardware concurrency when <= 0).
// Throws ConfigError on a malformed value.
int thread_count(int fallback = 0);

}  // namespace urnet

#endif  // URNET_RUNTIME_H_
