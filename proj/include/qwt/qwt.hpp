#pragma once

#include "qwt/errors.hpp"
#include "qwt/operator_core.hpp"
#include "qwt/random.hpp"
#include "qwt/parallel.hpp"
#include "qwt/io.hpp"
#include "qwt/ensembles.hpp"
#include "qwt/divergences.hpp"
#include "qwt/rate_bounds.hpp"
#include "qwt/wiretap_sim.hpp"
#include "qwt/trial_report.hpp"
#include "qwt/covering.hpp"
#include "qwt/concentration.hpp"
#include "qwt/spectral.hpp"
#include "qwt/experiment.hpp"
