#include "eprlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace eprlab::kernels {

#if defined(EPRLAB_HAVE_AVX2)
const Backend* avx2_backend_impl();
#endif

const Backend* avx2() {
#if defined(EPRLAB_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_backend_impl() : nullptr;
#else
  return nullptr;
#endif
}

std::vector<const Backend*> available() {
  std::vector<const Backend*> v{&scalar()};
  if (const Backend* b = avx2()) v.push_back(b);
  return v;
}

const Backend& active() {
  static const Backend* selected = [] {
    if (const char* env = std::getenv("EPRLAB_KERNELS")) {
      if (std::strcmp(env, "scalar") == 0) return &scalar();
      if (std::strcmp(env, "avx2") == 0 && avx2()) return avx2();
      // unknown or unavailable name falls through to the default choice
    }
    return avx2() ? avx2() : &scalar();
  }();
  return *selected;
}

}  // namespace eprlab::kernels
