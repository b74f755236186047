#include "kgprompt/kernels.hpp"

#include <cstdlib>
#include <string>

namespace kgprompt::kernels {

namespace {

const KernelTable kScalar{Isa::Scalar,      scalar::dot,  scalar::axpy,
                          scalar::gemv,     scalar::gemv_t_acc, scalar::ger};

#if defined(KGPROMPT_HAVE_AVX2)
const KernelTable kAvx2{Isa::Avx2,    avx2::dot,  avx2::axpy,
                        avx2::gemv,   avx2::gemv_t_acc, avx2::ger};

bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#if defined(KGPROMPT_HAVE_NEON)
// NEON is mandatory on aarch64.
const KernelTable kNeon{Isa::Neon,    neon::dot,  neon::axpy,
                        neon::gemv,   neon::gemv_t_acc, neon::ger};
#endif

const KernelTable& select() {
    if (const char* env = std::getenv("KGPROMPT_KERNELS"); env && std::string(env) == "scalar") {
        return kScalar;
    }
#if defined(KGPROMPT_HAVE_AVX2)
    if (cpu_has_avx2()) return kAvx2;
#endif
#if defined(KGPROMPT_HAVE_NEON)
    return kNeon;
#endif
    return kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

std::size_t available_tables(const KernelTable** out, std::size_t capacity) {
    std::size_t n = 0;
    auto push = [&](const KernelTable* t) {
        if (n < capacity) out[n] = t;
        ++n;
    };
    push(&kScalar);
#if defined(KGPROMPT_HAVE_AVX2)
    if (cpu_has_avx2()) push(&kAvx2);
#endif
#if defined(KGPROMPT_HAVE_NEON)
    push(&kNeon);
#endif
    return n < capacity ? n : capacity;
}

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

}  // namespace kgprompt::kernels
