#pragma once

#include "inrmri/adam.hpp"
#include "inrmri/data_model.hpp"
#include "inrmri/errors.hpp"
#include "inrmri/forward_model.hpp"
#include "inrmri/fourier.hpp"
#include "inrmri/grappa.hpp"
#include "inrmri/io.hpp"
#include "inrmri/metrics.hpp"
#include "inrmri/objective.hpp"
#include "inrmri/random.hpp"
#include "inrmri/reconstructor.hpp"
#include "inrmri/siren.hpp"
#include "inrmri/synthetic.hpp"
