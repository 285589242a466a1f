#pragma once

#include "eminret/energy.hpp"
#include "eminret/harness.hpp"
#include "eminret/io.hpp"
#include "eminret/model.hpp"
#include "eminret/oracle.hpp"
#include "eminret/schedulers.hpp"
#include "eminret/timeline.hpp"
#include "eminret/workload.hpp"
