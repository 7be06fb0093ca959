import type { ApiClient } from "./api.js";
import { GraphView } from "./render.js";
import type { TreeKind, TreeParams } from "./types.js";
import { ExplorerViewModel } from "./viewmodel.js";

export interface App {
  vm: ExplorerViewModel;
  view: GraphView;
}

/**
 * Mounts the explorer into `root`: a parameter form above the graph stage.
 * Edits are pushed to the viewmodel, which owns validation, debounce, and
 * all service traffic.
 */
export function createApp(root: HTMLElement, api: ApiClient, params?: TreeParams): App {
  const form = document.createElement("form");
  form.className = "controls";
  form.addEventListener("submit", (evt) => evt.preventDefault());

  const kindSelect = document.createElement("select");
  kindSelect.name = "kind";
  for (const kind of ["inheritance", "relevance"] as const) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = kind;
    kindSelect.append(option);
  }

  const view = new GraphView(rootStage(root, form), {
    onHover: (id) => vm.hover(id),
    onSelect: (id) => void vm.select(id),
    onReroot: (id) => void vm.reroot(id),
    onCloseDetail: () => vm.closeDetail(),
  });

  const vm = new ExplorerViewModel(
    api,
    {
      onGraph: (doc) => {
        kindSelect.value = doc.kind;
        view.renderGraph(doc);
      },
      onEmpty: () => view.renderEmpty(),
      onError: (message) => view.showBanner(message),
      onDetail: (id, detail, row) => view.showDetail(id, detail, row),
      onDetailClosed: () => view.closeDetail(),
      onHighlight: (ids) => view.setHighlight(ids),
    },
    params,
  );

  kindSelect.addEventListener("change", () => {
    vm.setKind(kindSelect.value as TreeKind);
  });
  form.append(labeled("kind", kindSelect));

  for (const name of ["N", "M", "T"] as const) {
    const input = document.createElement("input");
    input.type = "number";
    input.name = name;
    input.min = "1";
    input.step = "1";
    input.value = String(vm.state.params[name]);
    input.addEventListener("input", () => vm.setParam(name, input.value));
    form.append(labeled(name, input));
  }

  vm.refresh();
  return { vm, view };
}

function rootStage(root: HTMLElement, form: HTMLFormElement): HTMLElement {
  root.append(form);
  const body = document.createElement("div");
  body.className = "explorer-body";
  root.append(body);
  return body;
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  const caption = document.createElement("span");
  caption.textContent = text;
  label.append(caption, control);
  return label;
}
