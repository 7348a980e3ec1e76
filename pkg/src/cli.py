"""CLI interface for the fine-grained self-supervision toolkit."""

import os
from typing import Optional

import click

from src.cli_common import echo_json, fail, merge_params, require_seed, settings
from src.cli_dataset_commands import class_weights, metrics, scan, split
from src.cli_tensor_commands import ntxent, pixel_shuffle, sr_loss
from src.config import ConfigError, build_pipeline_config, load_json_config, parse_size
from src.grid import GridOps
from src.jigsaw_service import JigsawPretext, PermutationSetBuilder
from src.log import configure_logging
from src.models import PermutationSet, PipelineConfig, RunReport
from src.pipeline_service import PipelineService
from src.repository import DataRepository, ImageRepository
from src.rng import Rng
from src.smartcrop_service import SmartCropConfig, SmartCropper
from src.sr_kernels import SRKernels


def get_services():
    """Get fresh service instances."""
    data_repository = DataRepository()
    image_repository = ImageRepository()
    pipeline_service = PipelineService(image_repository, data_repository)
    return pipeline_service, image_repository, data_repository


def pipeline_config(
    ctx: click.Context,
    operation: Optional[dict] = None,
    input_path: Optional[str] = None,
    output: Optional[str] = None,
) -> PipelineConfig:
    """Merge the config file with global and command flags; flags win."""
    values = settings(ctx)
    return build_pipeline_config(
        values.get("config"),
        seed=values.get("seed"),
        jobs=values.get("jobs"),
        resize=values.get("resize"),
        crop_divisible=values.get("crop_divisible"),
        operation=operation,
        input=input_path,
        output=output,
    )


def prepare_image(ctx: click.Context, service: PipelineService, path: str):
    """Load an image with the global resize and divisibility-crop options."""
    values = settings(ctx)
    configured = values.get("config", {})
    size = values.get("resize") or parse_size(configured.get("resize"))
    crop_divisible = values.get("crop_divisible") or configured.get("crop_divisible")
    return service.prepare(path, size, int(crop_divisible) if crop_divisible else None)


def report_run(report: RunReport, output: str) -> None:
    """Print the run summary; exit 1 if any item failed."""
    click.echo(f"✓ {report.operation}: {report.succeeded}/{report.total} 件を処理しました")
    click.echo(f"  出力先: {output}/")
    click.echo(f"  実行レポート: {os.path.join(output, PipelineService.REPORT_NAME)}")
    if report.errors:
        for error in report.errors:
            click.echo(
                f"✗ 処理エラー: [{error['index']}] {error['path']}: {error['error']}", err=True
            )
        raise SystemExit(report.exit_code)


@click.group()
@click.option("--seed", type=int, default=None, help="乱数シード (64ビット整数)")
@click.option("--config", "config_path", default=None, help="JSON設定ファイル")
@click.option("--jobs", type=int, default=None, help="並列ワーカー数")
@click.option("--resize", default=None, help="前処理のリサイズ (WxH)")
@click.option("--crop-divisible", type=int, default=None, help="縦横をNの倍数に中央クロップ")
@click.option("--log-level", default="WARNING", help="ログレベル (DEBUG/INFO/WARNING/ERROR)")
@click.pass_context
def cli(ctx, seed, config_path, jobs, resize, crop_divisible, log_level):
    """細粒度自己教師あり学習ツールキット - 拡張・ジグソー・損失計算のCLIツール"""
    try:
        configure_logging(log_level)
        ctx.obj = {
            "seed": seed,
            "config": load_json_config(config_path) if config_path else {},
            "jobs": jobs,
            "resize": parse_size(resize),
            "crop_divisible": crop_divisible,
        }
    except ValueError as e:
        fail("設定エラー", e)


# ============================================================================
# Corpus Pipelines
# ============================================================================


@cli.command()
@click.option("--operation", "-o", default=None, help="操作名 (gamma, dcl-jigsaw など)")
@click.option("--input", "-i", "input_path", default=None, help="入力 (画像・ディレクトリ・CSV)")
@click.option("--output", default=None, help="出力ディレクトリ")
@click.option("--param", "-p", multiple=True, help="操作パラメータ key=value")
@click.pass_context
def augment(ctx, operation: Optional[str], input_path: Optional[str], output: Optional[str], param):
    """コーパスの全画像に拡張操作を適用します。

    Args:
        operation: 登録済みの操作名
        input_path: 入力パス
        output: 出力ディレクトリ
        param: 操作パラメータ
    """
    try:
        configured = settings(ctx).get("config", {}).get("operation") or {}
        if isinstance(configured, str):
            configured = {"name": configured}
        name = operation or configured.get("name")
        if not name:
            raise ConfigError("No operation given: pass --operation or set it in the config file")
        base = configured.get("params") if configured.get("name") == name else None
        config = pipeline_config(
            ctx, {"name": name, "params": merge_params(base, param)}, input_path, output
        )
        service, _, _ = get_services()
        report = service.run(config)
    except PipelineService.UnknownOperationError as e:
        fail("操作エラー", e)
    except ValueError as e:
        fail("設定エラー", e)
    except IOError as e:
        fail("入力エラー", e)
    report_run(report, config.output)


@cli.command()
@click.argument("variant")
@click.option("--input", "-i", "input_path", default=None, help="入力 (画像・ディレクトリ・CSV)")
@click.option("--output", default=None, help="出力ディレクトリ")
@click.option("--param", "-p", multiple=True, help="拡張側ビューのパラメータ key=value")
@click.pass_context
def pair(ctx, variant: str, input_path: Optional[str], output: Optional[str], param):
    """対照学習用の2ビュー (a/, b/) を生成します。

    Args:
        variant: ペアレシピ (original+dcl, jigsaw4x4+jigsaw2x2 など)
    """
    try:
        config = pipeline_config(
            ctx, {"name": "identity", "params": merge_params(None, param)}, input_path, output
        )
        service, _, _ = get_services()
        report = service.pair_emit(config, variant)
    except PipelineService.UnknownOperationError as e:
        fail("レシピエラー", e)
    except ValueError as e:
        fail("設定エラー", e)
    except IOError as e:
        fail("入力エラー", e)
    report_run(report, config.output)


@cli.command("sr-pair")
@click.option("--input", "-i", "input_path", default=None, help="入力 (画像・ディレクトリ・CSV)")
@click.option("--output", default=None, help="出力ディレクトリ")
@click.option("--crop-side", type=int, default=None, help="高解像度側のランダムクロップ辺長")
@click.option("--factor", type=int, default=SRKernels.DEFAULT_FACTOR, help="縮小倍率")
@click.pass_context
def sr_pair(ctx, input_path, output, crop_side: Optional[int], factor: int):
    """超解像用の高解像度 (hr/) と低解像度 (lr/) のペアを生成します。"""
    try:
        config = pipeline_config(ctx, None, input_path, output)
        service, _, _ = get_services()
        report = service.sr_pair(config, crop_side, factor)
    except ValueError as e:
        fail("設定エラー", e)
    except IOError as e:
        fail("入力エラー", e)
    report_run(report, config.output)


# ============================================================================
# Jigsaw Pretext
# ============================================================================


@cli.command()
@click.option("--count", type=int, default=100, help="順列の数")
@click.option(
    "--pool",
    type=int,
    default=PermutationSetBuilder.DEFAULT_POOL,
    help="各ステップの候補数 (0で全探索)",
)
@click.option("--output", default=None, help="出力JSONファイル (省略時は標準出力)")
@click.pass_context
def permset(ctx, count: int, pool: int, output: Optional[str]):
    """ハミング距離を最大化したジグソー順列セットを生成します。"""
    try:
        seed = require_seed(ctx)
        permutation_set = PermutationSetBuilder().generate(count, pool, Rng(seed))
    except ValueError as e:
        fail("パラメータエラー", e)

    document = {**permutation_set.to_dict(), "seed": seed, "candidate_pool": pool}
    if output is None:
        echo_json(document)
        return
    try:
        DataRepository.write_json(output, document)
    except IOError as e:
        fail("書き込みエラー", e)
    click.echo(f"✓ 順列セットを保存しました: {output}")
    click.echo(f"  順列数: {len(permutation_set)}")
    click.echo(f"  平均ハミング距離: {permutation_set.mean_hamming:.4f}")
    click.echo(f"  最小ハミング距離: {permutation_set.min_hamming}")


@cli.command()
@click.argument("image")
@click.option("--permset", "permset_path", required=True, help="順列セットJSON")
@click.option("--output", required=True, help="出力ディレクトリ")
@click.option("--count", type=int, default=1, help="1枚の画像から作るジグソー数")
@click.option("--verify", is_flag=True, help="逆順列で元画像に戻ることを確認")
@click.pass_context
def jigsaw(ctx, image: str, permset_path: str, output: str, count: int, verify: bool):
    """画像を3x3タイルに分割しシャッフルしたタイルとラベルを出力します。

    Args:
        image: 入力画像
    """
    try:
        seed = require_seed(ctx)
        service, images, data = get_services()
        permutation_set = PermutationSet.from_dict(data.read_json(permset_path))
        img = prepare_image(ctx, service, image)
        samples = JigsawPretext.make_jigsaw_samples(img, permutation_set, count, Rng(seed))
        for k, sample in enumerate(samples):
            directory = output if count == 1 else os.path.join(output, f"sample_{k}")
            os.makedirs(directory, exist_ok=True)
            for position, tile in enumerate(sample.tiles):
                images.save_image(tile, os.path.join(directory, f"tile_{position}.png"))
            data.write_json(
                os.path.join(directory, "label.json"),
                {
                    "label": sample.label,
                    "permutation": list(permutation_set.perms[sample.label]),
                    "seed": seed,
                    "sample": k,
                },
            )
    except GridOps.DivisibilityError as e:
        fail("分割エラー", e)
    except (KeyError, ValueError) as e:
        fail("パラメータエラー", e)
    except IOError as e:
        fail("入出力エラー", e)

    click.echo(f"✓ ジグソーを{len(samples)}件生成しました")
    click.echo(f"  出力先: {output}/")
    if verify:
        broken = [
            k
            for k, sample in enumerate(samples)
            if JigsawPretext.reassemble(sample, permutation_set) != img
        ]
        if broken:
            click.echo(f"✗ 検証エラー: 復元できないサンプル {broken}", err=True)
            raise SystemExit(1)
        click.echo("✓ 全サンプルが元画像に復元できることを確認しました")


# ============================================================================
# Smartcrop
# ============================================================================


@cli.command()
@click.argument("images", nargs=-1, required=True)
@click.option("--crop-config", default=None, help="SmartCrop設定JSON")
@click.option(
    "--overlay",
    default=None,
    help="クロップ外を白で塗った画像の出力先 (複数画像ではディレクトリ)",
)
@click.pass_context
def smartcrop(ctx, images, crop_config: Optional[str], overlay: Optional[str]):
    """最も重要な正方形領域を探索しJSONで出力します。

    画像が1枚ならクロップ矩形を、複数なら画像パス付きの配列を出力します。

    Args:
        images: 入力画像
    """
    try:
        service, image_repository, _ = get_services()
        settings_values = load_json_config(crop_config) if crop_config else {}
        cropper = SmartCropper(SmartCropConfig.from_dict(settings_values))
        if overlay and len(images) > 1:
            os.makedirs(overlay, exist_ok=True)
        results = []
        for image in images:
            img = prepare_image(ctx, service, image)
            crop = cropper.smart_crop(img)
            if overlay:
                target = overlay
                if len(images) > 1:
                    stem = os.path.splitext(os.path.basename(image))[0]
                    target = os.path.join(overlay, f"{stem}.png")
                image_repository.save_image(SmartCropper.overlay_on_white(img, crop), target)
            results.append({"image": image, **crop.to_dict()})
    except SmartCropper.ImageTooSmallError as e:
        fail("サイズエラー", e)
    except ValueError as e:
        fail("設定エラー", e)
    except IOError as e:
        fail("入出力エラー", e)
    if len(results) == 1:
        del results[0]["image"]
        echo_json(results[0])
    else:
        echo_json(results)


cli.add_command(split)
cli.add_command(class_weights)
cli.add_command(metrics)
cli.add_command(scan)
cli.add_command(ntxent)
cli.add_command(sr_loss)
cli.add_command(pixel_shuffle)


if __name__ == "__main__":
    cli()
