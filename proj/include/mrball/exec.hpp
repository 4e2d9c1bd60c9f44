#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace mrball {

// All batch kernels come in a serial reference flavor and an OpenMP flavor;
// both fill pre-sized output slots by index, so results are identical.
enum class ExecMode { serial, parallel };

// Runs fn(i) for i in [0, n). Exceptions are captured and rethrown after the
// parallel region joins (throwing across an OpenMP boundary is not allowed).
void parallel_for_indexed(std::size_t n, ExecMode mode, const std::function<void(std::size_t)>& fn);

int effective_workers();
void set_workers(int n);  // 0 restores the OpenMP default

}  // namespace mrball
