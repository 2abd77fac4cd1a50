#pragma once

#include "boxcast/arima.hpp"
#include "boxcast/data.hpp"
#include "boxcast/decomposition.hpp"
#include "boxcast/errors.hpp"
#include "boxcast/evaluation.hpp"
#include "boxcast/forecast.hpp"
#include "boxcast/lambda_opt.hpp"
#include "boxcast/normal.hpp"
#include "boxcast/optim.hpp"
#include "boxcast/simulate.hpp"
#include "boxcast/transform.hpp"
