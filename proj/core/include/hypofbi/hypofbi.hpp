#pragma once

#include "hypofbi/classify.hpp"
#include "hypofbi/corpus.hpp"
#include "hypofbi/error.hpp"
#include "hypofbi/expr.hpp"
#include "hypofbi/fbi.hpp"
#include "hypofbi/inversion.hpp"
#include "hypofbi/parallel.hpp"
#include "hypofbi/propagate.hpp"
#include "hypofbi/quadrature.hpp"
#include "hypofbi/structure.hpp"
