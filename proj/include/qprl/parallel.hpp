#pragma once

namespace qprl {

/// Effective worker count: OpenMP's max threads, capped by the
/// QPRL_THREADS environment variable when set.
int worker_count();

/// Applies the QPRL_THREADS cap to the OpenMP runtime. Called once by
/// entry points; safe to call repeatedly.
void configure_threads();

}  // namespace qprl
