#pragma once

#include "freecum/checker.hpp"
#include "freecum/distributions.hpp"
#include "freecum/engine.hpp"
#include "freecum/model.hpp"
#include "freecum/partition.hpp"
#include "freecum/rational.hpp"
#include "freecum/report.hpp"
#include "freecum/series.hpp"
