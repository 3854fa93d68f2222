#pragma once

#include <pdrisk/analytic_risk.hpp>
#include <pdrisk/cs_ext.hpp>
#include <pdrisk/geometry.hpp>
#include <pdrisk/mc_lab.hpp>
#include <pdrisk/parallel.hpp>
#include <pdrisk/prox.hpp>
#include <pdrisk/random.hpp>
#include <pdrisk/scalar_search.hpp>
#include <pdrisk/types.hpp>
