#pragma once

#include "lcurve/curve.hpp"
#include "lcurve/errors.hpp"
#include "lcurve/hyperopt.hpp"
#include "lcurve/json_io.hpp"
#include "lcurve/kernel.hpp"
#include "lcurve/oracle.hpp"
#include "lcurve/series.hpp"
#include "lcurve/specfun.hpp"
#include "lcurve/spectrum.hpp"
#include "lcurve/target.hpp"
