"""Per-node causal mechanisms.

Root nodes carry a marginal model (:class:`Empirical`, :class:`Gaussian`, or
:class:`Multinomial`).  Continuous non-root nodes carry an
:class:`AdditiveNoiseModel`: a regression function of the parents plus a noise
distribution inferred from the residuals.  Categorical non-root nodes carry a
:class:`ClassifierFcm`, a multinomial-logistic model sampled by inverse CDF.

All fitted objects are immutable; every stochastic operation takes an explicit
numpy generator supplied by the caller.
"""

import math

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .exceptions import FitError, SerializationError, UnseenCategoryError

_KNN_AUTO = "auto"
_CV_FOLDS = 5
_CV_SHUFFLE_SEED = 0
_RIDGE_SCALE = 1e-8
_COND_LIMIT = 1e12


def _as_float_array(values, what):
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1:
        raise FitError(f"{what} must be one-dimensional")
    if array.size and not np.all(np.isfinite(array)):
        raise FitError(f"{what} contains non-finite values")
    return array


def _is_numeric(values):
    return np.issubdtype(np.asarray(values).dtype, np.number)


class Empirical:
    """Marginal model that redraws the stored sample with replacement."""

    def __init__(self, samples):
        samples = _as_float_array(samples, "empirical samples")
        if samples.size == 0:
            raise FitError("empirical model needs at least one sample")
        samples.setflags(write=False)
        self.samples = samples

    def draw(self, n, rng):
        idx = rng.integers(0, self.samples.size, size=n)
        return self.samples[idx]

    def __repr__(self):
        return f"Empirical({self.samples.size} samples)"


class Gaussian:
    """Normal marginal with the given mean and standard deviation."""

    def __init__(self, mean, std):
        std = float(std)
        if not (std >= 0 and math.isfinite(std)) or not math.isfinite(float(mean)):
            raise FitError("gaussian parameters must be finite with std >= 0")
        self.mean = float(mean)
        self.std = std

    def draw(self, n, rng):
        return self.mean + self.std * rng.standard_normal(n)

    def __repr__(self):
        return f"Gaussian(mean={self.mean}, std={self.std})"


class Multinomial:
    """Categorical marginal; draws use the inverse CDF over category order."""

    def __init__(self, categories, probs):
        categories = tuple(str(c) for c in categories)
        probs = _as_float_array(probs, "multinomial probabilities")
        if len(categories) != probs.size or not categories:
            raise FitError("multinomial needs one probability per category")
        if len(set(categories)) != len(categories):
            raise FitError("multinomial categories must be unique")
        if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > 1e-12:
            raise FitError("multinomial probabilities must be >= 0 and sum to 1")
        probs.setflags(write=False)
        self.categories = categories
        self.probs = probs

    def draw(self, n, rng):
        u = rng.random(n)
        return categories_from_uniform(self.categories, np.tile(self.probs, (n, 1)), u)

    def __repr__(self):
        return f"Multinomial({dict(zip(self.categories, np.round(self.probs, 4)))})"


def categories_from_uniform(categories, probs, u):
    """Map uniform draws ``u`` to categories by inverse CDF, row by row."""
    cum = np.cumsum(probs, axis=1)
    idx = np.sum(cum <= np.asarray(u)[:, None], axis=1)
    idx = np.minimum(idx, len(categories) - 1)
    return np.array(categories, dtype=object)[idx]


def fit_stochastic(values, kind="auto"):
    """Fit a marginal model to a single column.

    ``auto`` picks :class:`Empirical` for numeric input and
    :class:`Multinomial` (relative frequencies) for categorical input.
    ``gaussian`` uses the sample mean and unbiased standard deviation.
    """
    values = np.asarray(values)
    if values.size == 0:
        raise FitError("cannot fit a marginal to empty input")
    numeric = _is_numeric(values)
    if kind == "auto":
        kind = "empirical" if numeric else "multinomial"
    if kind in ("empirical", "gaussian") and not numeric:
        raise FitError(f"kind {kind!r} requires continuous values")
    if kind == "multinomial" and numeric:
        raise FitError("kind 'multinomial' requires categorical values")

    if kind == "empirical":
        return Empirical(values)
    if kind == "gaussian":
        array = _as_float_array(values, "values")
        std = float(array.std(ddof=1)) if array.size > 1 else 0.0
        return Gaussian(float(array.mean()), std)
    if kind == "multinomial":
        categories, counts = np.unique([str(v) for v in values], return_counts=True)
        return Multinomial(tuple(categories), counts / counts.sum())
    raise FitError(f"unknown stochastic kind {kind!r}")


class InputEncoder:
    """Fixed encoding of parent columns into a real design matrix.

    Continuous parents pass through; categorical parents are one-hot encoded
    over the full category list seen at fit time (no category dropped).
    """

    def __init__(self, specs):
        self.specs = tuple(specs)

    @classmethod
    def fit(cls, parent_columns):
        specs = []
        for column in parent_columns:
            if _is_numeric(column):
                specs.append(("continuous", None))
            else:
                categories = np.unique([str(v) for v in column])
                specs.append(("categorical", tuple(categories)))
        return cls(specs)

    @classmethod
    def continuous(cls, n_parents):
        """Encoder for ``n_parents`` all-continuous parents (for hand-built models)."""
        return cls([("continuous", None)] * n_parents)

    @property
    def width(self):
        return sum(1 if kind == "continuous" else len(cats) for kind, cats in self.specs)

    def encode(self, parent_columns):
        if len(parent_columns) != len(self.specs):
            raise FitError(
                f"expected {len(self.specs)} parent columns, got {len(parent_columns)}"
            )
        n = len(parent_columns[0]) if parent_columns else 0
        parts = []
        for column, (kind, categories) in zip(parent_columns, self.specs):
            if kind == "continuous":
                parts.append(_as_float_array(column, "parent values")[:, None])
            else:
                index = {c: i for i, c in enumerate(categories)}
                block = np.zeros((n, len(categories)))
                for i, value in enumerate(column):
                    slot = index.get(str(value))
                    if slot is None:
                        raise UnseenCategoryError(
                            f"category {value!r} was not present when the model was fit"
                        )
                    block[i, slot] = 1.0
                parts.append(block)
        return np.hstack(parts) if parts else np.zeros((n, 0))

    def encode_row(self, parent_values):
        return self.encode([np.asarray([v]) for v in parent_values])


class LinearModel:
    """Linear regression over the encoded parents."""

    def __init__(self, coefficients, intercept):
        coefficients = _as_float_array(coefficients, "coefficients")
        coefficients.setflags(write=False)
        self.coefficients = coefficients
        self.intercept = float(intercept)

    def predict(self, encoded):
        return encoded @ self.coefficients + self.intercept

    def __repr__(self):
        coefficients = [float(c) for c in self.coefficients]
        return f"LinearModel(coefficients={coefficients}, intercept={self.intercept})"


class KnnRegressor:
    """k-nearest-neighbour regression over the encoded parents."""

    def __init__(self, k, inputs, targets, offset=0.0):
        inputs = np.asarray(inputs, dtype=np.float64)
        targets = _as_float_array(targets, "targets")
        if not 1 <= k <= len(targets):
            raise FitError("k must be between 1 and the number of training rows")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        self.k = int(k)
        self.inputs = inputs
        self.targets = targets
        self.offset = float(offset)

    def predict(self, encoded):
        encoded = np.asarray(encoded, dtype=np.float64)
        out = np.empty(len(encoded))
        chunk = max(1, int(2_000_000 / max(len(self.targets), 1)))
        for start in range(0, len(encoded), chunk):
            distances = cdist(encoded[start : start + chunk], self.inputs)
            # Stable sort keeps predictions deterministic when distances tie.
            order = np.argsort(distances, axis=1, kind="stable")[:, : self.k]
            out[start : start + chunk] = self.targets[order].mean(axis=1)
        return out + self.offset

    def __repr__(self):
        return f"KnnRegressor(k={self.k}, n_train={len(self.targets)})"


def default_knn_k(n_train):
    return max(1, min(int(round(math.sqrt(n_train))), n_train))


def _fit_linear(encoded, targets):
    design = np.hstack([encoded, np.ones((len(targets), 1))])
    gram = design.T @ design
    rhs = design.T @ targets
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        # Ridge fallback keeps degenerate designs (collinear one-hot blocks,
        # constant parents) solvable without changing well-posed fits.
        lam = _RIDGE_SCALE * np.trace(gram) / gram.shape[0]
        gram = gram + lam * np.eye(gram.shape[0])
    beta = np.linalg.solve(gram, rhs)
    return LinearModel(beta[:-1], beta[-1])


class AbductedNoise(float):
    """A recovered noise value that remembers the equation it inverts.

    The float value is the correctly rounded residual ``observed -
    prediction``.  The exact real-number sum ``prediction + (observed -
    prediction)`` is ``observed`` itself, which one more IEEE addition cannot
    always reproduce, so the defining pair is kept and
    :meth:`AdditiveNoiseModel.evaluate` uses it to return the exact sum.
    """

    __slots__ = ("prediction", "observed")

    def __new__(cls, prediction, observed):
        self = super().__new__(cls, observed - prediction)
        self.prediction = prediction
        self.observed = observed
        return self


class AdditiveNoiseModel:
    """Structural assignment: value = prediction(parents) + noise."""

    def __init__(self, prediction, noise, encoder):
        if not isinstance(noise, (Empirical, Gaussian)):
            raise FitError("additive noise must be a continuous marginal model")
        self.prediction = prediction
        self.noise = noise
        self.encoder = encoder

    def predict(self, parent_columns) -> np.ndarray:
        """Vectorised prediction from raw (unencoded) parent columns."""
        return self.prediction.predict(self.encoder.encode(list(parent_columns)))

    def predict_row(self, parent_values) -> float:
        return float(self.prediction.predict(self.encoder.encode_row(parent_values))[0])

    def evaluate(self, parent_values, noise_value) -> float:
        prediction = self.predict_row(parent_values)
        if isinstance(noise_value, AbductedNoise) and noise_value.prediction == prediction:
            return noise_value.observed
        return prediction + noise_value

    def estimate_noise(self, parent_values, observed) -> AbductedNoise:
        """Recover the noise value that reproduces ``observed`` under evaluate."""
        return AbductedNoise(self.predict_row(parent_values), float(observed))

    def __repr__(self):
        return f"AdditiveNoiseModel(prediction={self.prediction!r}, noise={self.noise!r})"


def _cross_validated_mse(encoded, targets, fit_one):
    n = len(targets)
    shuffled = np.random.default_rng(_CV_SHUFFLE_SEED).permutation(n)
    fold_of = np.empty(n, dtype=int)
    fold_of[shuffled] = np.arange(n) % _CV_FOLDS
    squared_errors = []
    for fold in range(_CV_FOLDS):
        test = fold_of == fold
        if not test.any() or test.all():
            continue
        model = fit_one(encoded[~test], targets[~test])
        errors = targets[test] - model.predict(encoded[test])
        squared_errors.append(errors**2)
    return float(np.concatenate(squared_errors).mean())


def fit_anm(parent_columns, targets, model_kind="auto"):
    """Fit an additive noise model of ``targets`` given raw parent columns.

    ``model_kind`` selects the regression family: ``linear`` (ordinary least
    squares with a ridge fallback for singular designs), ``knn``, or ``auto``,
    which picks the family with the lower 5-fold cross-validated MSE.  The
    noise is the empirical residual distribution, mean-centred with the mean
    folded into the regression offset.
    """
    parent_columns = list(parent_columns)
    if not parent_columns:
        raise FitError("an additive noise model needs at least one parent")
    targets = _as_float_array(targets, "targets")
    if targets.size < 2:
        raise FitError("insufficient rows: need at least 2 to fit an additive noise model")
    encoder = InputEncoder.fit(parent_columns)
    encoded = encoder.encode(parent_columns)

    def fit_knn(train_x, train_y):
        return KnnRegressor(default_knn_k(len(train_y)), train_x, train_y)

    if model_kind == _KNN_AUTO:
        mse_linear = _cross_validated_mse(encoded, targets, _fit_linear)
        mse_knn = _cross_validated_mse(encoded, targets, fit_knn)
        model_kind = "linear" if mse_linear <= mse_knn else "knn"

    if model_kind == "linear":
        prediction = _fit_linear(encoded, targets)
    elif model_kind == "knn":
        prediction = fit_knn(encoded, targets)
    else:
        raise FitError(f"unknown model kind {model_kind!r}")

    residuals = targets - prediction.predict(encoded)
    mean = float(residuals.mean())
    residuals = residuals - mean
    if isinstance(prediction, LinearModel):
        prediction = LinearModel(prediction.coefficients, prediction.intercept + mean)
    else:
        prediction = KnnRegressor(
            prediction.k, prediction.inputs, prediction.targets, prediction.offset + mean
        )
    return AdditiveNoiseModel(prediction, Empirical(residuals), encoder)


class ClassifierFcm:
    """Multinomial-logistic mechanism for categorical non-root nodes.

    The noise is a uniform variate mapped through the inverse CDF of the
    predicted class probabilities, in category order.
    """

    def __init__(self, encoder, categories, weights):
        weights = np.asarray(weights, dtype=np.float64)
        categories = tuple(str(c) for c in categories)
        if weights.shape != (encoder.width + 1, len(categories)):
            raise FitError("classifier weight shape does not match encoder and categories")
        weights.setflags(write=False)
        self.encoder = encoder
        self.categories = categories
        self.weights = weights

    def predict_probs(self, parent_columns) -> np.ndarray:
        encoded = self.encoder.encode(list(parent_columns))
        design = np.hstack([encoded, np.ones((len(encoded), 1))])
        logits = design @ self.weights
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        return exp / exp.sum(axis=1, keepdims=True)

    def probs_row(self, parent_values) -> np.ndarray:
        return self.predict_probs([np.asarray([v]) for v in parent_values])[0]

    def sample_class(self, parent_values, rng) -> str:
        probs = self.probs_row(parent_values)
        value = categories_from_uniform(self.categories, probs[None, :], rng.random(1))
        return str(value[0])

    def classes_from_uniform(self, parent_columns, u) -> np.ndarray:
        return categories_from_uniform(self.categories, self.predict_probs(parent_columns), u)

    def __repr__(self):
        return f"ClassifierFcm(categories={list(self.categories)})"


def fit_classifier(parent_columns, targets):
    """Fit a multinomial-logistic mechanism from raw parent columns."""
    parent_columns = list(parent_columns)
    if not parent_columns:
        raise FitError("a classifier mechanism needs at least one parent")
    targets = [str(v) for v in targets]
    if len(targets) < 2:
        raise FitError("insufficient rows: need at least 2 to fit a classifier")
    encoder = InputEncoder.fit(parent_columns)
    encoded = encoder.encode(parent_columns)
    categories = tuple(np.unique(targets))
    n, d = encoded.shape
    n_classes = len(categories)
    if n_classes == 1:
        return ClassifierFcm(encoder, categories, np.zeros((d + 1, 1)))

    design = np.hstack([encoded, np.ones((n, 1))])
    index = {c: i for i, c in enumerate(categories)}
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), [index[t] for t in targets]] = 1.0
    reg = 1e-6

    def objective(flat):
        weights = flat.reshape(d + 1, n_classes)
        logits = design @ weights
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        probs = exp / exp.sum(axis=1, keepdims=True)
        nll = -np.mean(np.log(np.maximum((probs * onehot).sum(axis=1), 1e-300)))
        grad = design.T @ (probs - onehot) / n + 2 * reg * weights
        return nll + reg * float((weights**2).sum()), grad.ravel()

    result = minimize(
        objective,
        np.zeros((d + 1) * n_classes),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 500},
    )
    return ClassifierFcm(encoder, categories, result.x.reshape(d + 1, n_classes))


def is_continuous_mechanism(mechanism) -> bool:
    """Whether the mechanism produces real values (as opposed to categories)."""
    return isinstance(mechanism, (Empirical, Gaussian, AdditiveNoiseModel))


def _encoder_to_json(encoder):
    out = []
    for kind, categories in encoder.specs:
        if kind == "continuous":
            out.append({"kind": "continuous"})
        else:
            out.append({"kind": "categorical", "categories": list(categories)})
    return out


def _encoder_from_json(payload):
    specs = []
    for item in payload:
        if item["kind"] == "continuous":
            specs.append(("continuous", None))
        else:
            specs.append(("categorical", tuple(item["categories"])))
    return InputEncoder(specs)


def mechanism_to_json(mechanism) -> dict:
    """Tagged JSON representation (variant name plus parameters)."""
    if isinstance(mechanism, Empirical):
        return {"type": "empirical", "samples": [float(v) for v in mechanism.samples]}
    if isinstance(mechanism, Gaussian):
        return {"type": "gaussian", "mean": mechanism.mean, "std": mechanism.std}
    if isinstance(mechanism, Multinomial):
        return {
            "type": "multinomial",
            "categories": list(mechanism.categories),
            "probs": [float(p) for p in mechanism.probs],
        }
    if isinstance(mechanism, AdditiveNoiseModel):
        prediction = mechanism.prediction
        if isinstance(prediction, LinearModel):
            prediction_json = {
                "type": "linear",
                "coefficients": [float(c) for c in prediction.coefficients],
                "intercept": prediction.intercept,
            }
        else:
            prediction_json = {
                "type": "knn",
                "k": prediction.k,
                "offset": prediction.offset,
                "inputs": [[float(v) for v in row] for row in prediction.inputs],
                "targets": [float(v) for v in prediction.targets],
            }
        return {
            "type": "anm",
            "encoding": _encoder_to_json(mechanism.encoder),
            "prediction": prediction_json,
            "noise": mechanism_to_json(mechanism.noise),
        }
    if isinstance(mechanism, ClassifierFcm):
        return {
            "type": "classifier",
            "encoding": _encoder_to_json(mechanism.encoder),
            "categories": list(mechanism.categories),
            "weights": [[float(v) for v in row] for row in mechanism.weights],
        }
    raise SerializationError(f"cannot serialize mechanism {mechanism!r}")


def mechanism_from_json(payload) -> object:
    """Inverse of :func:`mechanism_to_json`."""
    try:
        kind = payload["type"]
        if kind == "empirical":
            return Empirical(payload["samples"])
        if kind == "gaussian":
            return Gaussian(payload["mean"], payload["std"])
        if kind == "multinomial":
            return Multinomial(payload["categories"], payload["probs"])
        if kind == "anm":
            encoder = _encoder_from_json(payload["encoding"])
            prediction_json = payload["prediction"]
            if prediction_json["type"] == "linear":
                prediction = LinearModel(
                    prediction_json["coefficients"], prediction_json["intercept"]
                )
            elif prediction_json["type"] == "knn":
                prediction = KnnRegressor(
                    prediction_json["k"],
                    prediction_json["inputs"],
                    prediction_json["targets"],
                    prediction_json["offset"],
                )
            else:
                raise SerializationError(
                    f"unknown prediction model {prediction_json['type']!r}"
                )
            return AdditiveNoiseModel(prediction, mechanism_from_json(payload["noise"]), encoder)
        if kind == "classifier":
            return ClassifierFcm(
                _encoder_from_json(payload["encoding"]),
                payload["categories"],
                payload["weights"],
            )
    except (KeyError, TypeError, ValueError, FitError) as exc:
        raise SerializationError(f"corrupt mechanism payload: {exc}") from exc
    raise SerializationError(f"unknown mechanism type {payload.get('type')!r}")
