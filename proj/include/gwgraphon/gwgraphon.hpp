#pragma once

#include "gwgraphon/core.hpp"
#include "gwgraphon/sampling.hpp"
#include "gwgraphon/gw_solver.hpp"
#include "gwgraphon/barycenter.hpp"
#include "gwgraphon/smoothed.hpp"
#include "gwgraphon/mixture.hpp"
#include "gwgraphon/eval.hpp"
#include "gwgraphon/io.hpp"
#include "gwgraphon/benchmark.hpp"
