#pragma once

#include "fwlab/besov.hpp"
#include "fwlab/characteristics.hpp"
#include "fwlab/config.hpp"
#include "fwlab/envelope.hpp"
#include "fwlab/error.hpp"
#include "fwlab/experiment.hpp"
#include "fwlab/fft.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/initial_data.hpp"
#include "fwlab/nonlocal.hpp"
#include "fwlab/report.hpp"
#include "fwlab/solver.hpp"
