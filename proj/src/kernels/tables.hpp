#pragma once

#include "lofi/kernels.hpp"

namespace lofi::kernels::detail {

#if defined(LOFI_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(LOFI_HAVE_NEON_KERNELS)
const KernelTable& neon_table() noexcept;
#endif

}  // namespace lofi::kernels::detail
