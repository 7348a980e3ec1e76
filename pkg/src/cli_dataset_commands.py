"""CLI commands for corpus manifests and evaluation metrics."""

from typing import Optional

import click

from src.cli_common import echo_json, fail, require_seed
from src.dataset_service import DatasetService
from src.metrics_service import MetricsService
from src.repository import DataRepository
from src.rng import Rng


def get_dataset_services():
    """Get dataset service instances."""
    repository = DataRepository()
    return DatasetService(repository), repository


@click.command()
@click.argument("manifest")
@click.argument("output")
@click.option("--train-fraction", type=float, default=DatasetService.DEFAULT_TRAIN_FRACTION, help="学習用の割合")
@click.pass_context
def split(ctx, manifest: str, output: str, train_fraction: float):
    """マニフェストをクラスごとに train/val へ層化分割します。

    Args:
        manifest: 入力マニフェストCSV
        output: 分割タグ付きマニフェストの出力先
    """
    try:
        seed = require_seed(ctx)
        service, repository = get_dataset_services()
        tagged = service.stratified_split(
            repository.load_manifest(manifest), train_fraction, Rng(seed)
        )
        repository.save_manifest(tagged, output)
    except DatasetService.SplitError as e:
        fail("分割エラー", e)
    except ValueError as e:
        fail("パラメータエラー", e)
    except IOError as e:
        fail("入出力エラー", e)

    train = len(tagged.by_split("train"))
    click.echo(f"✓ マニフェストを分割しました: {output}")
    click.echo(f"  train: {train} 件")
    click.echo(f"  val: {len(tagged) - train} 件")


@click.command("class-weights")
@click.argument("manifest")
def class_weights(manifest: str):
    """クラス重み N/(K·n_c) をJSONで出力します。

    Args:
        manifest: 入力マニフェストCSV
    """
    try:
        service, repository = get_dataset_services()
        weights = service.class_weights(repository.load_manifest(manifest))
    except ValueError as e:
        fail("パラメータエラー", e)
    except IOError as e:
        fail("入力エラー", e)
    echo_json(weights.to_dict())


@click.command()
@click.argument("labels")
@click.option("--output", default=None, help="評価レポートJSONの出力先")
@click.option("--json", "as_json", is_flag=True, help="表の代わりにJSONを標準出力へ")
def metrics(labels: str, output: Optional[str], as_json: bool):
    """true,pred のCSVからクラス別の適合率・再現率・F1を計算します。

    Args:
        labels: true,pred 列を持つCSV
    """
    try:
        _, repository = get_dataset_services()
        report = MetricsService.evaluate(repository.load_label_pairs(labels))
        if output:
            repository.write_json(output, report.to_dict())
    except MetricsService.EmptyInputError as e:
        fail("入力エラー", e)
    except IOError as e:
        fail("入出力エラー", e)

    if as_json:
        echo_json(report.to_dict())
        return
    click.echo(MetricsService.format_report(report))
    if report.unknown_labels:
        click.echo(f"未知の予測ラベル: {', '.join(report.unknown_labels)}")
    if output:
        click.echo(f"✓ 評価レポートを保存しました: {output}")


@click.command()
@click.argument("root")
@click.argument("output")
def scan(root: str, output: str):
    """<label>/<image> 形式のディレクトリからマニフェストを作成します。

    Args:
        root: コーパスのルートディレクトリ
        output: マニフェストCSVの出力先
    """
    try:
        service, repository = get_dataset_services()
        manifest = service.scan_directory(root)
        repository.save_manifest(manifest, output)
    except (IOError, ValueError) as e:
        fail("入出力エラー", e)

    click.echo(f"✓ マニフェストを作成しました: {output}")
    for label, count in manifest.counts().items():
        click.echo(f"  {label}: {count} 件")
