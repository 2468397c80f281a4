#pragma once

#include "fragdyn/core.hpp"
#include "fragdyn/encoding.hpp"
#include "fragdyn/engine.hpp"
#include "fragdyn/experiments.hpp"
#include "fragdyn/gate_table.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/model_itbs.hpp"
#include "fragdyn/model_motzkin.hpp"
#include "fragdyn/models.hpp"
#include "fragdyn/observables.hpp"
#include "fragdyn/oracle.hpp"
#include "fragdyn/plot.hpp"
#include "fragdyn/rng.hpp"
