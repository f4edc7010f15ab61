#pragma once

#include "common.hpp"
#include "quadrature.hpp"
#include "lie_core.hpp"
#include "characters.hpp"
#include "model_geometry.hpp"
#include "hardy_exact.hpp"
#include "asymp_predictor.hpp"
