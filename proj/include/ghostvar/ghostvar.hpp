#pragma once

#include "ghostvar/analysis.hpp"
#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/io/csv.hpp"
#include "ghostvar/io/report.hpp"
#include "ghostvar/io/split.hpp"
#include "ghostvar/io/svg.hpp"
#include "ghostvar/linalg/distributions.hpp"
#include "ghostvar/linalg/eigen.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/ols.hpp"
#include "ghostvar/linalg/partial_correlation.hpp"
#include "ghostvar/linalg/qr.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/parallel.hpp"
#include "ghostvar/predictors/external.hpp"
#include "ghostvar/predictors/linear.hpp"
#include "ghostvar/predictors/mlp.hpp"
#include "ghostvar/predictors/prediction_function.hpp"
#include "ghostvar/relevance.hpp"
#include "ghostvar/relmatrix.hpp"
#include "ghostvar/synthetic.hpp"
