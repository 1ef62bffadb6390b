#pragma once

#include "greyshill/attack.hpp"
#include "greyshill/dataset.hpp"
#include "greyshill/detector.hpp"
#include "greyshill/em.hpp"
#include "greyshill/error.hpp"
#include "greyshill/experiment.hpp"
#include "greyshill/features.hpp"
#include "greyshill/io.hpp"
#include "greyshill/knn.hpp"
#include "greyshill/metrics.hpp"
#include "greyshill/random.hpp"
#include "greyshill/rating_matrix.hpp"
#include "greyshill/series.hpp"
#include "greyshill/wavelet.hpp"
