#pragma once

#include "levylab/action.hpp"
#include "levylab/common.hpp"
#include "levylab/concentration.hpp"
#include "levylab/config.hpp"
#include "levylab/dynamics.hpp"
#include "levylab/folner.hpp"
#include "levylab/parallel.hpp"
#include "levylab/permutation.hpp"
#include "levylab/quadrature.hpp"
#include "levylab/rng.hpp"
#include "levylab/sphere.hpp"
#include "levylab/spherical_set.hpp"
#include "levylab/subspace.hpp"
#include "levylab/words.hpp"
