#include "opium/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace opium::kernels {

#if !(defined(__x86_64__) || defined(_M_X64))
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

#if !(defined(__aarch64__) || defined(_M_ARM64))
const KernelTable* neon_table() noexcept { return nullptr; }
#endif

namespace {

const KernelTable* best_available() noexcept
{
    if (const auto* t = avx2_table())
        return t;
    if (const auto* t = neon_table())
        return t;
    return &scalar_table();
}

const KernelTable* initial_table() noexcept
{
    if (const char* env = std::getenv("OPIUM_ISA")) {
        if (auto isa = parse_isa(env)) {
            if (const auto* t = table_for(*isa))
                return t;
        }
    }
    return best_available();
}

std::atomic<const KernelTable*>& slot() noexcept
{
    static std::atomic<const KernelTable*> current{initial_table()};
    return current;
}

} // namespace

const KernelTable* table_for(Isa isa) noexcept
{
    switch (isa) {
    case Isa::scalar: return &scalar_table();
    case Isa::avx2: return avx2_table();
    case Isa::neon: return neon_table();
    }
    return nullptr;
}

const KernelTable& active() noexcept
{
    return *slot().load(std::memory_order_acquire);
}

bool set_active(Isa isa) noexcept
{
    const auto* t = table_for(isa);
    if (!t)
        return false;
    slot().store(t, std::memory_order_release);
    return true;
}

std::optional<Isa> parse_isa(std::string_view name) noexcept
{
    if (name == "scalar")
        return Isa::scalar;
    if (name == "avx2")
        return Isa::avx2;
    if (name == "neon")
        return Isa::neon;
    return std::nullopt;
}

const char* isa_name(Isa isa) noexcept
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

} // namespace opium::kernels
