#pragma once

#include "traits/search.hpp"

namespace traits {

// Constant-trait ablation: the same best-first search, but provisioning
// durations pinned at the demand-implied spans, no exhaustible budgets across
// tasks, no battery or C-rating constraints (transitions at top speed), and
// deadline-free scheduling. Its output is meant to be audited by
// validate_plan, which exposes the violations these relaxations cause.
inline SearchOutcome constant_trait_baseline(const Scenario& s, const Router& router,
                                             const SearchOptions& base = {}) {
    SearchOptions opt = base;
    opt.dist.et_budgets = false;
    opt.dist.battery = false;
    opt.dist.rate_aware = false;
    opt.schedule_deadlines = false;
    return search(s, router, opt);
}

}  // namespace traits
