#pragma once

#include "field.hpp"
#include "config.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "weights.hpp"
#include "rowops.hpp"
#include "pfaffian.hpp"
#include "shuffle.hpp"
#include "triangular.hpp"
#include "symfun.hpp"
#include "asep.hpp"
