#pragma once

#include "tailray/errors.hpp"
#include "tailray/random.hpp"
#include "tailray/normal.hpp"
#include "tailray/margins.hpp"
#include "tailray/copulas.hpp"
#include "tailray/kappa.hpp"
#include "tailray/estimators.hpp"
#include "tailray/bench.hpp"
