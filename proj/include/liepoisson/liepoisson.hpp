#pragma once

#include "catalog.hpp"
#include "checks.hpp"
#include "config.hpp"
#include "connection.hpp"
#include "core.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "metric.hpp"
#include "poisson.hpp"
#include "polynomial.hpp"
#include "random.hpp"
#include "scalar_field.hpp"
#include "tensor.hpp"
#include "trajectory.hpp"
#include "variational.hpp"
