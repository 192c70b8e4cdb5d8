#pragma once

#include "tnt/arithmetic.hpp"
#include "tnt/cross.hpp"
#include "tnt/decompose.hpp"
#include "tnt/dense_tensor.hpp"
#include "tnt/errors.hpp"
#include "tnt/indexing.hpp"
#include "tnt/io.hpp"
#include "tnt/matrices.hpp"
#include "tnt/random.hpp"
#include "tnt/tensor.hpp"
