// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <cstring>

#include "envforge/kernels.hpp"

namespace envforge::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct State {
  const Ops* active = nullptr;
  Isa isa = Isa::scalar;
};

State& state() {
  static State s = [] {
    State st;
    st.active = &scalar_ops();
    st.isa = Isa::scalar;
    bool want_avx2 = cpu_has_avx2() && avx2_ops() != nullptr;
    if (const char* env = std::getenv("ENVFORGE_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) want_avx2 = false;
      // "avx2" and "auto" both defer to the CPUID check above
    }
    if (want_avx2) {
      st.active = avx2_ops();
      st.isa = Isa::avx2;
    }
    return st;
  }();
  return s;
}

}  // namespace

const Ops& ops() { return *state().active; }

Isa active_isa() { return state().isa; }

std::string isa_name() { return state().isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() { return cpu_has_avx2() && avx2_ops() != nullptr; }

void force_isa(Isa isa) {
  State& s = state();
  if (isa == Isa::avx2 && avx2_available()) {
    s.active = avx2_ops();
    s.isa = Isa::avx2;
  } else {
    s.active = &scalar_ops();
    s.isa = Isa::scalar;
  }
}

}  // namespace envforge::kernels
