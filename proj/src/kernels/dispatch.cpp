#include "pcdecomp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace pcdecomp::kernels {

#if defined(PCDECOMP_HAVE_AVX2)
const KernelTable* avx2_table_unchecked() noexcept;
#endif

namespace {

[[maybe_unused]] bool cpu_has_avx2() noexcept {
#if defined(PCDECOMP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    const KernelTable* best = avx2_table();
    if (const char* env = std::getenv("PCDECOMP_KERNELS")) {
        std::string_view want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && best != nullptr) return best;
    }
    return best != nullptr ? best : &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

} // namespace

const KernelTable* avx2_table() noexcept {
#if defined(PCDECOMP_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? avx2_table_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
    const KernelTable* table = isa == Isa::scalar ? &scalar_table() : avx2_table();
    if (table == nullptr) return false;
    current().store(table, std::memory_order_release);
    return true;
}

std::string_view name(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

} // namespace pcdecomp::kernels
