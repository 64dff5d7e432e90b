"""Stratified K-fold evaluation, ranking, PCA study, correlation diagnostic.

The fold plan shuffles each class with a seeded generator and deals the
shuffled members round-robin with one global counter, so fold sizes AND
per-class fold counts both differ by at most one. Cross-validation fits on
the K-1 training folds only (classifiers standardize internally on what
they are given, so no holdout row leaks into any fitted statistic), scores
the holdout fold, and summarises the K misclassification rates by their
mean and population standard deviation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import numerics as nm
from .bayes import KernelKind, fit_lda, fit_nb, fit_qda
from .core import ClassifierModel, Dataset, FeatureSelection
from .errors import (
    BadConfig,
    BadK,
    CdsProxyError,
    EmptyClass,
    FitFailure,
    MissingCell,
    TooFewSamples,
)
from .logistic import fit_logistic_multiclass
from .neighbors import Metric, fit_knn
from .neuralnet import Activation, TrainConfig, fit_neural_net
from .svm import KernelSpec, MulticlassStrategy, SvmKernel, fit_svm_multiclass
from .trees import SplitCriterion, fit_bagged, fit_tree

DEFAULT_FOLDS = 10
_FOLD_SEED_STRIDE = 100003      # distinct per-fold fit seeds from one run seed


# ----------------------------------------------------------------- folds


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every sample to exactly one of k folds."""

    k: int
    assignment: np.ndarray
    seed: int

    def holdout_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def training_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def stratified_folds(dataset: Dataset, k: int, seed: int = 0) -> FoldPlan:
    """Per-class seeded shuffle, then one global round-robin dealing pass."""
    n = dataset.n
    if k < 2 or k > n:
        raise BadK(f"fold count must satisfy 2 <= K <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    assignment = np.full(n, -1, dtype=int)
    counter = 0
    for j in range(dataset.n_classes):
        rows = np.flatnonzero(dataset.y == j)
        if rows.size == 0:
            raise EmptyClass(
                f"class {dataset.class_names[j]!r} has no samples to deal")
        for row in rows[rng.permutation(rows.size)]:
            assignment[row] = counter % k
            counter += 1
    return FoldPlan(k=k, assignment=assignment, seed=seed)


# ------------------------------------------------------------ classifier grid


@dataclass(frozen=True)
class ClassifierSpec:
    """A named entry of the classifier grid: label plus a fit callable."""

    label: str
    family: str
    fitter: Callable[[Dataset, int], ClassifierModel]
    params: tuple = ()

    def fit(self, train: Dataset, seed: int = 0) -> ClassifierModel:
        return self.fitter(train, seed)

    def describe(self) -> dict:
        return {"label": self.label, "family": self.family,
                **dict(self.params)}


def _spec_factories() -> dict:
    def lda(mode):
        return lambda train, seed: fit_lda(train, mode=mode)

    def qda(mode):
        return lambda train, seed: fit_qda(train, mode=mode)

    def nb(kernel, bandwidth):
        return lambda train, seed: fit_nb(train, kernel=kernel,
                                          bandwidth=bandwidth)

    def knn(metric, k, standardize):
        return lambda train, seed: fit_knn(train, k=k, metric=metric,
                                           standardize=standardize)

    def logistic(ridge):
        return lambda train, seed: fit_logistic_multiclass(train, ridge=ridge)

    def tree(criterion, max_splits):
        return lambda train, seed: fit_tree(train, criterion=criterion,
                                            max_splits=max_splits)

    def svm(kind, cost, degree, strategy):
        kernel = KernelSpec(kind=kind, degree=degree)
        return lambda train, seed: fit_svm_multiclass(
            train, kernel=kernel, cost=cost, strategy=strategy)

    def net(activation, hidden):
        return lambda train, seed: fit_neural_net(
            train, hidden_units=hidden, activation=activation,
            config=TrainConfig(seed=seed))

    def bagged(criterion, n_trees, max_splits):
        return lambda train, seed: fit_bagged(train, n_trees=n_trees,
                                              criterion=criterion,
                                              max_splits=max_splits, seed=seed)

    return {"lda": lda, "qda": qda, "nb": nb, "knn": knn, "logistic": logistic,
            "tree": tree, "svm": svm, "net": net, "bagged": bagged}


def make_classifier_spec(label: str, *, bandwidth: float = 0.2, k: int = 9,
                         max_splits: int = 20, n_trees: int = 30,
                         cost: float = 1.0, degree: int = 3,
                         hidden_units: int = 10,
                         svm_strategy: MulticlassStrategy = MulticlassStrategy.ONE_VS_REST,
                         knn_standardize: bool | None = None) -> ClassifierSpec:
    """Resolve a grid label (e.g. 'QDA-FullCov') plus hyperparameter
    overrides into a fit callable."""
    f = _spec_factories()
    table: dict[str, tuple] = {
        "LDA-FullCov": ("DA", f["lda"](nm.CovMode.FULL), ()),
        "LDA-DiagonalCov": ("DA", f["lda"](nm.CovMode.DIAGONAL), ()),
        "QDA-FullCov": ("DA", f["qda"](nm.CovMode.FULL), ()),
        "QDA-DiagonalCov": ("DA", f["qda"](nm.CovMode.DIAGONAL), ()),
        "NB-norm-kernel": ("NB", f["nb"](KernelKind.NORMAL, bandwidth),
                           (("bandwidth", bandwidth),)),
        "NB-tria-kernel": ("NB", f["nb"](KernelKind.TRIANGULAR, bandwidth),
                           (("bandwidth", bandwidth),)),
        "NB-epan-kernel": ("NB", f["nb"](KernelKind.EPANECHNIKOV, bandwidth),
                           (("bandwidth", bandwidth),)),
        "KNN-Euclidean": ("KNN", f["knn"](Metric.EUCLIDEAN, k, knn_standardize),
                          (("k", k),)),
        "KNN-CityBlock": ("KNN", f["knn"](Metric.CITYBLOCK, k, knn_standardize),
                          (("k", k),)),
        "KNN-Mahalanobis": ("KNN", f["knn"](Metric.MAHALANOBIS, k, knn_standardize),
                            (("k", k),)),
        "LR": ("LR", f["logistic"](1e-4), ()),
        "DT-Gini": ("DT", f["tree"](SplitCriterion.GINI, max_splits),
                    (("max_splits", max_splits),)),
        "DT-Entropy": ("DT", f["tree"](SplitCriterion.ENTROPY, max_splits),
                       (("max_splits", max_splits),)),
        "DT-Twoing": ("DT", f["tree"](SplitCriterion.TWOING, max_splits),
                      (("max_splits", max_splits),)),
        "SVM-Linear": ("SVM", f["svm"](SvmKernel.LINEAR, cost, degree, svm_strategy),
                       (("cost", cost),)),
        "SVM-Gaussian": ("SVM", f["svm"](SvmKernel.GAUSSIAN, cost, degree, svm_strategy),
                         (("cost", cost),)),
        "SVM-Poly": ("SVM", f["svm"](SvmKernel.POLYNOMIAL, cost, degree, svm_strategy),
                     (("cost", cost), ("degree", degree))),
        "NN-Tangent": ("NN", f["net"](Activation.TAN_SIGMOID, hidden_units),
                       (("hidden_units", hidden_units),)),
        "NN-Linear": ("NN", f["net"](Activation.LINEAR, hidden_units),
                      (("hidden_units", hidden_units),)),
        "NN-Elliot": ("NN", f["net"](Activation.ELLIOT_SIGMOID, hidden_units),
                      (("hidden_units", hidden_units),)),
        "BaggedTree": ("BaggedTree",
                       f["bagged"](SplitCriterion.GINI, n_trees, max_splits),
                       (("n_trees", n_trees), ("max_splits", max_splits))),
        "BaggedTree-Gini": ("BaggedTree",
                            f["bagged"](SplitCriterion.GINI, n_trees, max_splits),
                            (("n_trees", n_trees), ("max_splits", max_splits))),
        "BaggedTree-Entropy": ("BaggedTree",
                               f["bagged"](SplitCriterion.ENTROPY, n_trees, max_splits),
                               (("n_trees", n_trees), ("max_splits", max_splits))),
        "BaggedTree-Twoing": ("BaggedTree",
                              f["bagged"](SplitCriterion.TWOING, n_trees, max_splits),
                              (("n_trees", n_trees), ("max_splits", max_splits))),
    }
    if label not in table:
        raise BadConfig(f"unknown classifier label {label!r}; "
                        f"known labels: {', '.join(sorted(table))}")
    family, fitter, params = table[label]
    return ClassifierSpec(label=label, family=family, fitter=fitter,
                          params=params)


DEFAULT_GRID: tuple[str, ...] = (
    "LDA-FullCov", "LDA-DiagonalCov", "QDA-FullCov", "QDA-DiagonalCov",
    "NB-norm-kernel", "NB-tria-kernel", "NB-epan-kernel",
    "KNN-Euclidean", "KNN-CityBlock", "KNN-Mahalanobis",
    "LR",
    "DT-Gini", "DT-Entropy", "DT-Twoing",
    "SVM-Linear", "SVM-Gaussian", "SVM-Poly",
    "NN-Tangent", "NN-Linear", "NN-Elliot",
    "BaggedTree",
)


# ------------------------------------------------------------------ CV


@dataclass(frozen=True)
class CvResult:
    """Per-fold holdout misclassification rates and their summary."""

    label: str
    selection: str
    k: int
    seed: int
    fold_errors: tuple[float, ...]
    mean_error: float
    sd_error: float

    @property
    def accuracy(self) -> float:
        return 1.0 - self.mean_error


def summarize_errors(errors: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation (divide by K inside the root)."""
    k = len(errors)
    mean = math.fsum(errors) / k
    var = math.fsum((e - mean) ** 2 for e in errors) / k
    return mean, math.sqrt(var)


def fold_seed(seed: int, fold: int) -> int:
    return seed * _FOLD_SEED_STRIDE + fold


def cross_validate(spec: ClassifierSpec, dataset: Dataset,
                   k: int = DEFAULT_FOLDS, seed: int = 0,
                   plan: FoldPlan | None = None) -> CvResult:
    """Fit on each K-1 training split, score its holdout fold.

    Any error raised while fitting a fold is re-raised as FitFailure with
    the fold index; no partial result is returned.
    """
    if plan is None:
        plan = stratified_folds(dataset, k, seed)
    errors = []
    for fold in range(plan.k):
        train = dataset.subset(plan.training_rows(fold))
        holdout = plan.holdout_rows(fold)
        try:
            model = spec.fit(train, fold_seed(seed, fold))
        except CdsProxyError as exc:
            raise FitFailure(
                f"{spec.label} on fold {fold}: {exc}") from exc
        predicted = model.classify_batch(dataset.x[holdout])
        errors.append(float(np.mean(predicted != dataset.y[holdout])))
    mean, sd = summarize_errors(errors)
    selection = dataset.selection.value if dataset.selection else ""
    return CvResult(label=spec.label, selection=selection,
                    k=plan.k, seed=seed, fold_errors=tuple(errors),
                    mean_error=mean, sd_error=sd)


# --------------------------------------------------------------- ranking


@dataclass(frozen=True)
class RankingRow:
    label: str
    accuracies: tuple[float, ...]      # one per feature selection, in order
    mean_accuracy: float
    sd_accuracy: float


@dataclass(frozen=True)
class RankingTable:
    selections: tuple[str, ...]
    rows: tuple[RankingRow, ...]


def rank_classifiers(results: Iterable[CvResult],
                     selections: Sequence[FeatureSelection | str] = tuple(FeatureSelection),
                     ) -> RankingTable:
    """Mean/sd of accuracy over the feature selections, best row first."""
    wanted = tuple(FeatureSelection(s).value for s in selections)
    cells: dict[tuple[str, str], CvResult] = {}
    labels: list[str] = []
    for res in results:
        if res.label not in labels:
            labels.append(res.label)
        cells[(res.label, res.selection)] = res
    rows = []
    for label in labels:
        accs = []
        for sel in wanted:
            if (label, sel) not in cells:
                raise MissingCell(f"no result for {label} on {sel}")
            accs.append(cells[(label, sel)].accuracy)
        mean, sd = summarize_errors(accs)
        rows.append(RankingRow(label=label, accuracies=tuple(accs),
                               mean_accuracy=mean, sd_accuracy=sd))
    rows.sort(key=lambda r: (-r.mean_accuracy, r.sd_accuracy, r.label))
    return RankingTable(selections=wanted, rows=tuple(rows))


# -------------------------------------------------------------- PCA study


@dataclass(frozen=True)
class PcaStudyResult:
    label: str
    k: int
    seed: int
    component_errors: tuple[float, ...]     # mean error using m = 1..d PCs
    raw_error: float                        # untransformed features
    variance_explained: tuple[float, ...]   # cumulative share, full data

    def component_accuracies(self) -> tuple[float, ...]:
        return tuple(1.0 - e for e in self.component_errors)


def pca_study(spec: ClassifierSpec, dataset: Dataset,
              k: int = DEFAULT_FOLDS, seed: int = 0) -> PcaStudyResult:
    """Accuracy as a function of the number of leading components.

    The component basis is refit on every training fold so holdout rows
    never influence the transform; the raw-feature column reuses the same
    fold plan, making it exactly comparable.
    """
    if dataset.d < 2:
        raise BadConfig("component study needs at least two features")
    plan = stratified_folds(dataset, k, seed)
    fold_bases = []
    for fold in range(plan.k):
        train_rows = plan.training_rows(fold)
        fold_bases.append(nm.pca_fit(dataset.x[train_rows]))
    component_errors = []
    for m in range(1, dataset.d + 1):
        errors = []
        names = tuple(f"component_{i + 1}" for i in range(m))
        for fold in range(plan.k):
            basis = fold_bases[fold]
            train_rows = plan.training_rows(fold)
            holdout = plan.holdout_rows(fold)
            train = Dataset(x=nm.pca_transform(basis, dataset.x[train_rows], m),
                            y=dataset.y[train_rows],
                            class_names=dataset.class_names,
                            feature_names=names)
            try:
                model = spec.fit(train, fold_seed(seed, fold))
            except CdsProxyError as exc:
                raise FitFailure(
                    f"{spec.label} with {m} components on fold {fold}: {exc}"
                ) from exc
            predicted = model.classify_batch(
                nm.pca_transform(basis, dataset.x[holdout], m))
            errors.append(float(np.mean(predicted != dataset.y[holdout])))
        component_errors.append(summarize_errors(errors)[0])
    raw = cross_validate(spec, dataset, k=k, seed=seed, plan=plan)
    full_basis = nm.pca_fit(dataset.x)
    return PcaStudyResult(label=spec.label, k=plan.k, seed=seed,
                          component_errors=tuple(component_errors),
                          raw_error=raw.mean_error,
                          variance_explained=tuple(full_basis.variance_explained))


# ------------------------------------------------------ correlation study


@dataclass(frozen=True)
class CorrelationHistogram:
    bin_edges: tuple[float, ...]            # 21 edges, width 0.1 over [-1, 1]
    counts: tuple[int, ...]                 # 20 bins
    values: tuple[float, ...]               # defined pairwise correlations
    undefined_pairs: int

    def fraction_above(self, threshold: float) -> float:
        if not self.values:
            return 0.0
        return float(np.mean(np.asarray(self.values) > threshold))


def correlation_histogram(dataset: Dataset) -> CorrelationHistogram:
    """Pearson correlations of every feature pair, binned in steps of 0.1."""
    if dataset.n < 3:
        raise TooFewSamples(
            f"correlations need at least 3 samples, got {dataset.n}")
    if dataset.d < 2:
        raise BadConfig("correlations need at least two features")
    x = dataset.x
    centered = x - x.mean(axis=0)
    scales = np.sqrt((centered * centered).sum(axis=0))
    values = []
    undefined = 0
    for a in range(dataset.d):
        for b in range(a + 1, dataset.d):
            if scales[a] == 0.0 or scales[b] == 0.0:
                undefined += 1
                continue
            r = float(centered[:, a] @ centered[:, b] / (scales[a] * scales[b]))
            values.append(min(1.0, max(-1.0, r)))
    edges = np.linspace(-1.0, 1.0, 21)
    counts, _ = np.histogram(np.asarray(values), bins=edges)
    return CorrelationHistogram(bin_edges=tuple(float(e) for e in edges),
                                counts=tuple(int(c) for c in counts),
                                values=tuple(values),
                                undefined_pairs=undefined)


# ------------------------------------------------------------- CSV output


def format_float(v: float) -> str:
    return repr(float(v))


def config_header(settings: dict) -> list[str]:
    """Sorted `# key=value` comment lines embedded in every output file."""
    return [f"# {key}={settings[key]}" for key in sorted(settings)]


def render_csv(header_settings: dict, columns: Sequence[str],
               rows: Iterable[Sequence]) -> str:
    lines = config_header(header_settings)
    lines.append(",".join(columns))
    for row in rows:
        rendered = [format_float(v) if isinstance(v, float) else str(v)
                    for v in row]
        lines.append(",".join(rendered))
    return "\n".join(lines) + "\n"


def render_cv_csv(result: CvResult, settings: dict) -> str:
    columns = ["fold", "misclassification_rate"]
    rows: list[Sequence] = [(i, e) for i, e in enumerate(result.fold_errors)]
    rows.append(("mean", result.mean_error))
    rows.append(("sd", result.sd_error))
    return render_csv(settings, columns, rows)


def render_ranking_csv(table: RankingTable, settings: dict) -> str:
    columns = (["classifier"] + [f"accuracy_{s}" for s in table.selections]
               + ["mean_accuracy", "sd_accuracy"])
    rows = [[row.label, *row.accuracies, row.mean_accuracy, row.sd_accuracy]
            for row in table.rows]
    return render_csv(settings, columns, rows)


def render_family_csv(results: Sequence[CvResult], settings: dict) -> str:
    """Per-classifier mean/sd table over feature selections."""
    columns = ["classifier", "feature_selection", "mean_error", "sd_error"]
    rows = [(r.label, r.selection, r.mean_error, r.sd_error) for r in results]
    return render_csv(settings, columns, rows)


def render_pca_csv(study: PcaStudyResult, settings: dict) -> str:
    columns = ["components", "accuracy", "variance_explained",
               "accuracy_minus_raw"]
    rows: list[Sequence] = []
    raw_accuracy = 1.0 - study.raw_error
    for i, err in enumerate(study.component_errors):
        acc = 1.0 - err
        rows.append((i + 1, acc, study.variance_explained[i],
                     acc - raw_accuracy))
    rows.append(("raw", raw_accuracy, 1.0, 0.0))
    return render_csv(settings, columns, rows)


def render_histogram_csv(hist: CorrelationHistogram, settings: dict) -> str:
    columns = ["bin_low", "bin_high", "count"]
    rows: list[Sequence] = [
        (hist.bin_edges[i], hist.bin_edges[i + 1], hist.counts[i])
        for i in range(len(hist.counts))]
    rows.append(("undefined", "undefined", hist.undefined_pairs))
    return render_csv(settings, columns, rows)
