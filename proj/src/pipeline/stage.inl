#pragma once

#include <chrono>

#include "common/error.hpp"

namespace lap::pipeline {

template <typename Fn>
auto run_stage(const std::string& name, RunManifest* manifest, Fn&& fn) -> decltype(fn()) {
  const auto begin = std::chrono::steady_clock::now();
  auto record = [&] {
    if (!manifest) return;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - begin;
    manifest->timings.emplace_back(name, elapsed.count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto result = fn();
      record();
      return result;
    }
  } catch (const Error& e) {
    throw Error(e.code(), "[" + name + "] " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Internal, "[" + name + "] " + e.what());
  }
}

}  // namespace lap::pipeline
