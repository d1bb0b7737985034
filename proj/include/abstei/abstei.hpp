#pragma once

#include "abstei/error.hpp"
#include "abstei/panel.hpp"
#include "abstei/translog.hpp"
#include "abstei/normal.hpp"
#include "abstei/bfgs.hpp"
#include "abstei/tobit.hpp"
#include "abstei/efficiency.hpp"
#include "abstei/inference.hpp"
#include "abstei/reference.hpp"
#include "abstei/simulate.hpp"
#include "abstei/config.hpp"
#include "abstei/report.hpp"
