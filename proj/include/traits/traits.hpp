#pragma once

// Battery-aware trait provisioning and scheduling for heterogeneous
// multi-robot teams: domain model, trait algebra, battery model, grid
// routing, hierarchical trait distribution, makespan scheduling, best-first
// allocation search, plan auditing and benchmark tooling.

#include "traits/algebra.hpp"
#include "traits/baseline.hpp"
#include "traits/battery.hpp"
#include "traits/bench.hpp"
#include "traits/distributor.hpp"
#include "traits/generator.hpp"
#include "traits/gridmap.hpp"
#include "traits/heuristics.hpp"
#include "traits/json_io.hpp"
#include "traits/model.hpp"
#include "traits/router.hpp"
#include "traits/scheduler.hpp"
#include "traits/search.hpp"
#include "traits/validate.hpp"
