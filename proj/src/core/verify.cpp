#include "core/verify.hpp"

#include <algorithm>
#include <cmath>

#include "core/entropics.hpp"
#include "core/indecomposability.hpp"
#include "core/rng.hpp"

namespace qmc {
namespace {

// Largest block length whose working dimension stays under the cap.
int max_uses(const ChannelSpec& spec, int want) {
    long long dim = spec.d_m * spec.d_e;
    int n = 0;
    while (n < want && dim * spec.d_q <= dimension_cap()) {
        dim *= spec.d_q;
        ++n;
    }
    return n;
}

DensityMatrix random_input(const ChannelSpec& spec, int n, Rng& rng) {
    int dim = 1;
    for (int i = 0; i < n; ++i) dim *= spec.d_q;
    return random_density(dim, rng).with_shape(SpaceShape::uses(spec.d_q, n));
}

void finish(VerifyCheck& c, VerifyReport& out) {
    c.passed = !c.applicable || c.worst <= c.tolerance;
    if (c.applicable && !c.passed) out.ok = false;
    out.checks.push_back(std::move(c));
}

}  // namespace

VerifyReport run_verify(const ParsedChannel& chan, std::uint64_t seed) {
    const ChannelSpec& spec = chan.spec;
    VerifyReport out;
    Rng root(seed);
    const int n_top = max_uses(spec, 3);

    {
        VerifyCheck trace;
        trace.name = "trace_preservation";
        trace.tolerance = 1e-9;
        VerifyCheck psd;
        psd.name = "positivity";
        psd.tolerance = 1e-8;
        Rng rng = root.derive(0x1);
        for (int n = 1; n <= n_top; ++n) {
            for (int t = 0; t < 8; ++t) {
                const DensityMatrix rho = random_input(spec, n, rng);
                const DensityMatrix mem = random_density(spec.d_m, rng);
                const DensityMatrix out_state = apply_memory_channel(spec, rho, mem, n);
                const ComplexMatrix& o = out_state.matrix();
                trace.worst = std::max(trace.worst, std::abs(o.trace().real() - 1.0));
                psd.worst = std::max(psd.worst, -hermitian_eigvals(o).back());
                ++trace.samples;
                ++psd.samples;
            }
        }
        if (n_top < 3) {
            trace.detail = "block length limited by the dimension cap";
            psd.detail = trace.detail;
        }
        finish(trace, out);
        finish(psd, out);
    }

    {
        VerifyCheck eq;
        eq.name = "markov_form_equivalence";
        eq.tolerance = 1e-9;
        if (!chan.markov) {
            eq.applicable = false;
            eq.detail = "channel was not built from a markov block";
        } else {
            MarkovChannelSpec other = *chan.markov;
            other.fixed_point_form = !other.fixed_point_form;
            const ChannelSpec alt = build_markov_channel(other);
            Rng rng = root.derive(0x2);
            for (int n = 1; n <= max_uses(alt, 3); ++n) {
                for (int t = 0; t < 4; ++t) {
                    const DensityMatrix rho = random_input(spec, n, rng);
                    eq.worst = std::max(
                        eq.worst,
                        trace_distance(apply_memory_channel(spec, rho, spec.initial_memory, n),
                                       apply_memory_channel(alt, rho, spec.initial_memory, n)));
                    ++eq.samples;
                }
            }
        }
        finish(eq, out);
    }

    {
        VerifyCheck cont;
        cont.name = "memory_continuity";
        cont.tolerance = 1e-9;
        cont.samples = 50;
        cont.worst = check_memory_continuity(spec, 50, root.derive(0x3).next_u64());
        finish(cont, out);
    }

    {
        VerifyCheck fan;
        fan.name = "entropy_continuity";
        fan.tolerance = 1e-9;
        Rng rng = root.derive(0x4);
        for (int t = 0; t < 100; ++t) {
            const DensityMatrix a = random_density(spec.d_q, rng);
            const DensityMatrix b = random_density(spec.d_q, rng);
            const double gap = std::abs(von_neumann_entropy(a) - von_neumann_entropy(b));
            fan.worst = std::max(fan.worst, gap - fannes_bound(trace_distance(a, b), spec.d_q));
            ++fan.samples;
        }
        finish(fan, out);
    }

    return out;
}

}  // namespace qmc
