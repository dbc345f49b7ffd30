#pragma once

#include "error.hpp"
#include "scalar.hpp"
#include "dense_matrix.hpp"
#include "sparse_matrix.hpp"
#include "permutation.hpp"
#include "matrix_market.hpp"
#include "dense_la.hpp"
#include "rank_lu.hpp"
#include "rank_lu_io.hpp"
#include "bordered.hpp"
#include "arnoldi.hpp"
#include "two_sided.hpp"
#include "problems.hpp"
#include "report.hpp"
