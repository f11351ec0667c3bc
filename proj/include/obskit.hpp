/**
 * @file obskit.hpp
 * @brief Umbrella header: structural observability, identifiability, and
 *        input-reconstructibility analysis for nonlinear ODE models.
 */
#pragma once

#include "obskit/affine.hpp"
#include "obskit/algorithms.hpp"
#include "obskit/augment.hpp"
#include "obskit/common.hpp"
#include "obskit/diff.hpp"
#include "obskit/eval.hpp"
#include "obskit/expr.hpp"
#include "obskit/lie.hpp"
#include "obskit/matrix.hpp"
#include "obskit/model.hpp"
#include "obskit/rank.hpp"
#include "obskit/rational.hpp"
#include "obskit/replicate.hpp"
#include "obskit/report_io.hpp"
#include "obskit/subst.hpp"
#include "obskit/symbol.hpp"
